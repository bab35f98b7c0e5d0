#include "edasched/io.hpp"

#include <fstream>
#include <sstream>

namespace edasched {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

template <typename T>
T field(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw ParseError(std::string("missing field '") + key + "'");
  }
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

Eigen::VectorXd vector_field(const json& doc, const char* key) {
  const auto values = field<std::vector<double>>(doc, key);
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::VectorXd vector_from(const json& value, const std::string& what) {
  try {
    const auto values = value.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

json jobs_to_json(const StaticJobs& jobs) {
  return {{"releases", vector_to_json(jobs.releases)}, {"processings", vector_to_json(jobs.processings)}};
}

StaticJobs jobs_from_json(const json& doc) {
  StaticJobs jobs{vector_field(doc, "releases"), vector_field(doc, "processings")};
  jobs.validate();
  return jobs;
}

void require_n(const json& doc, Eigen::Index actual) {
  const auto n = field<long long>(doc, "n");
  if (n != actual) {
    throw ParseError("field 'n' is " + std::to_string(n) + " but the arrays have length " + std::to_string(actual));
  }
}

}  // namespace

json instance_to_json(const Instance& instance) {
  json doc = jobs_to_json(instance.statics);
  doc["n"] = instance.size();
  doc["delivery"] = vector_to_json(instance.delivery);
  return doc;
}

Instance instance_from_json(const json& doc) {
  Instance instance(jobs_from_json(doc), vector_field(doc, "delivery"));
  require_n(doc, instance.size());
  return instance;
}

json problem_to_json(const ProblemSpec& problem) {
  const MixtureSpec& m = problem.mixture;
  json doc = {
      {"n", m.n},
      {"f", m.events},
      {"eps", m.eps},
      {"M", m.bound},
      {"const", m.min_prob_const},
      {"tail_mass", m.tail_mass},
      {"law", to_string(m.law)},
      {"grid", m.grid_step()},
      {"separated", m.separated},
      {"seed", m.seed},
  };
  doc.update(jobs_to_json(problem.jobs));
  return doc;
}

ProblemSpec problem_from_json(const json& doc) {
  ProblemSpec out;
  MixtureSpec& m = out.mixture;
  m.n = field<long long>(doc, "n");
  m.events = field<std::size_t>(doc, "f");
  m.eps = field<double>(doc, "eps");
  m.bound = field<double>(doc, "M");
  m.min_prob_const = field<double>(doc, "const");
  m.tail_mass = field<double>(doc, "tail_mass");
  m.law = parse_cube_law(field<std::string>(doc, "law"));
  m.seed = field<std::uint64_t>(doc, "seed");
  if (doc.contains("grid")) m.grid = field<double>(doc, "grid");
  if (doc.contains("separated")) m.separated = field<bool>(doc, "separated");
  m.validate();

  if (doc.contains("releases") || doc.contains("processings")) {
    out.jobs = jobs_from_json(doc);
    if (out.jobs.size() != m.n) {
      throw ParseError("job arrays have length " + std::to_string(out.jobs.size()) + ", expected n = " +
                       std::to_string(m.n));
    }
  } else {
    out.jobs = random_static_jobs(m.n, derive_seed(m.seed, 1));
  }
  return out;
}

json population_to_json(const Population& pop, const StaticJobs& jobs, double eps) {
  if (!pop.finalized) {
    throw std::invalid_argument("population_to_json: only finalized populations are written");
  }
  json entries = json::array();
  for (const CounterEntry& e : pop.counter.entries()) {
    entries.push_back({{"vector", vector_to_json(e.vector)}, {"count", e.count}});
  }
  json finals = json::array();
  for (const FinalIndividual& fi : pop.finals) {
    json members = json::array();
    for (const DeliveryVector& m : fi.members) members.push_back(vector_to_json(m));
    finals.push_back({
        {"members", members},
        {"counts", fi.counts},
        {"normalizer", fi.normalizer},
        {"total", fi.total},
        {"weights", fi.weights},
        {"mean", vector_to_json(fi.mean)},
        {"permutation", fi.schedule.perm},
        {"scheduled_lateness", fi.scheduled_lateness()},
        {"event_prob", fi.event_prob},
        {"certified_ratio", fi.certified_ratio},
        {"certificate_met", fi.certificate_met},
    });
  }
  return json{
      {"format", "edasched-population"},
      {"version", 1},
      {"eps", eps},
      {"generation", pop.generation},
      {"jobs", jobs_to_json(jobs)},
      {"counter", {{"total", pop.counter.total()}, {"entries", entries}}},
      {"finals", finals},
  };
}

PopulationFile population_from_json(const json& doc) {
  if (field<std::string>(doc, "format") != "edasched-population") {
    throw ParseError("not a population document");
  }
  const json counter_doc = field<json>(doc, "counter");
  std::vector<CounterEntry> entries;
  for (const json& e : field<json>(counter_doc, "entries")) {
    entries.push_back({vector_from(field<json>(e, "vector"), "counter entry"), field<std::uint64_t>(e, "count")});
  }
  CounterIndividual counter = CounterIndividual::from_entries(std::move(entries), field<std::uint64_t>(counter_doc, "total"));

  StaticJobs jobs = jobs_from_json(field<json>(doc, "jobs"));
  std::vector<FinalIndividual> finals;
  for (const json& f : field<json>(doc, "finals")) {
    FinalIndividual fi;
    for (const json& m : field<json>(f, "members")) fi.members.push_back(vector_from(m, "member"));
    fi.counts = field<std::vector<std::uint64_t>>(f, "counts");
    fi.normalizer = field<std::uint64_t>(f, "normalizer");
    fi.total = field<std::uint64_t>(f, "total");
    fi.weights = field<std::vector<double>>(f, "weights");
    fi.mean = vector_field(f, "mean");
    fi.event_prob = field<double>(f, "event_prob");
    fi.certified_ratio = field<double>(f, "certified_ratio");
    fi.certificate_met = field<bool>(f, "certificate_met");
    Permutation perm = field<Permutation>(f, "permutation");
    if (!is_permutation_of(perm, jobs.size())) {
      throw ParseError("final individual carries an invalid permutation");
    }
    fi.schedule = evaluate(Instance(jobs, fi.mean), std::move(perm));
    finals.push_back(std::move(fi));
  }
  return PopulationFile{Population(std::move(counter), std::move(finals), field<std::uint64_t>(doc, "generation")),
                        std::move(jobs), field<double>(doc, "eps")};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError(path.string() + ": not found or not readable");
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError(path.string() + ": cannot open for writing");
  }
  out << text;
  if (!out) {
    throw IoError(path.string() + ": write failed");
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc, int indent) {
  write_text_file(path, doc.dump(indent) + "\n");
}

}  // namespace edasched
