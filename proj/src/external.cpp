#include "polarpref/external.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>

#include <nlohmann/json.hpp>

#include "polarpref/numeric.hpp"

namespace polarpref {

std::string_view to_string(DiffMode m) { return m == DiffMode::per_example ? "per-example" : "dataset-mean"; }

DiffMode diff_mode_from_string(std::string_view s) {
  if (s == "per-example") return DiffMode::per_example;
  if (s == "dataset-mean") return DiffMode::dataset_mean;
  throw std::invalid_argument("unknown diff mode '" + std::string(s) + "'");
}

namespace {

std::string describe(const std::vector<std::string>& gen, const std::vector<std::string>& gt) {
  std::string msg = "epitome id sets differ";
  auto list = [&](const char* label, const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    msg += std::string("; missing in ") + label + ":";
    for (std::size_t i = 0; i < ids.size() && i < 20; ++i) msg += " " + ids[i];
    if (ids.size() > 20) msg += " ... (" + std::to_string(ids.size()) + " total)";
  };
  list("generated", gen);
  list("ground truth", gt);
  return msg;
}

}  // namespace

IdMismatchError::IdMismatchError(std::vector<std::string> missing_in_gen, std::vector<std::string> missing_in_gt)
    : std::runtime_error(describe(missing_in_gen, missing_in_gt)),
      missing_gen_(std::move(missing_in_gen)),
      missing_gt_(std::move(missing_in_gt)) {}

double mean_of_three(double er, double ex, double ip) { return (er + ex + ip) / 3.0; }

DiffEpitome diff_epitome(std::span<const EpitomeRecord> gen, std::span<const EpitomeRecord> gt, DiffMode mode) {
  std::map<std::string, const EpitomeRecord*> g, t;
  for (const auto& r : gen) g[r.dialogue_id] = &r;
  for (const auto& r : gt) t[r.dialogue_id] = &r;
  std::vector<std::string> missing_gen, missing_gt;
  for (const auto& [id, _] : t) {
    if (!g.contains(id)) missing_gen.push_back(id);
  }
  for (const auto& [id, _] : g) {
    if (!t.contains(id)) missing_gt.push_back(id);
  }
  if (!missing_gen.empty() || !missing_gt.empty()) throw IdMismatchError(missing_gen, missing_gt);
  if (g.empty()) throw std::invalid_argument("diff_epitome: no records");

  numeric::CompensatedSum a_er, a_ex, a_ip, b_er, b_ex, b_ip;
  for (const auto& [id, x] : g) {
    const EpitomeRecord* y = t.at(id);
    if (mode == DiffMode::per_example) {
      a_er.add(std::fabs(x->er - y->er));
      a_ex.add(std::fabs(x->ex - y->ex));
      a_ip.add(std::fabs(x->ip - y->ip));
    } else {
      a_er.add(x->er);
      a_ex.add(x->ex);
      a_ip.add(x->ip);
      b_er.add(y->er);
      b_ex.add(y->ex);
      b_ip.add(y->ip);
    }
  }
  const double n = static_cast<double>(g.size());
  DiffEpitome d;
  if (mode == DiffMode::per_example) {
    d.er = a_er.value() / n;
    d.ex = a_ex.value() / n;
    d.ip = a_ip.value() / n;
  } else {
    d.er = std::fabs(a_er.value() / n - b_er.value() / n);
    d.ex = std::fabs(a_ex.value() / n - b_ex.value() / n);
    d.ip = std::fabs(a_ip.value() / n - b_ip.value() / n);
  }
  d.mean_of_three = mean_of_three(d.er, d.ex, d.ip);
  return d;
}

SimilarityAggregate aggregate_similarity(std::span<const SimilarityRecord> records) {
  if (records.empty()) throw std::invalid_argument("aggregate_similarity: no records");
  std::vector<double> xs;
  xs.reserve(records.size());
  for (const auto& r : records) xs.push_back(r.f_score);
  SimilarityAggregate a;
  a.n = xs.size();
  a.mean = numeric::mean(xs);
  if (xs.size() >= 2) a.sd = std::sqrt(numeric::variance(xs));
  return a;
}

namespace {

double bounded(const nlohmann::json& j, const char* key, double hi, std::size_t line) {
  const double v = j.at(key).get<double>();
  if (!(v >= 0.0 && v <= hi)) {
    throw std::invalid_argument("line " + std::to_string(line) + ": " + key + "=" + std::to_string(v) +
                                " outside [0, " + std::to_string(hi) + "]");
  }
  return v;
}

template <typename Fn>
void each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("line " + std::to_string(n) + ": " + e.what());
    }
    fn(j, n);
  }
}

}  // namespace

std::vector<EpitomeRecord> read_epitome(std::istream& in) {
  std::vector<EpitomeRecord> out;
  each_json_line(in, [&](const nlohmann::json& j, std::size_t n) {
    out.push_back(EpitomeRecord{j.at("dialogue_id").get<std::string>(), bounded(j, "er", 2.0, n),
                                bounded(j, "ex", 2.0, n), bounded(j, "ip", 2.0, n)});
  });
  return out;
}

std::vector<SimilarityRecord> read_similarity(std::istream& in) {
  std::vector<SimilarityRecord> out;
  each_json_line(in, [&](const nlohmann::json& j, std::size_t n) {
    out.push_back(SimilarityRecord{j.at("dialogue_id").get<std::string>(), bounded(j, "f_score", 1.0, n)});
  });
  return out;
}

std::vector<EpitomeRecord> read_epitome_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_epitome(in);
}

std::vector<SimilarityRecord> read_similarity_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_similarity(in);
}

}  // namespace polarpref
