#include "polarpref/report.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

#include "polarpref/text.hpp"

namespace polarpref::report {

namespace {

using json = nlohmann::json;

constexpr std::array<const char*, 3> kDimNames = {"intensity", "valence", "arousal"};

ordered_json opt(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (!std::isfinite(*v)) return *v > 0 ? "inf" : (*v < 0 ? "-inf" : "nan");
  return *v;
}

std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto& v = j.at(key);
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    return NAN;
  }
  return v.get<double>();
}

ordered_json scores_json(const UtteranceScore& s) {
  ordered_json j;
  j["nidf"] = opt(s.nidf_mean);
  j["intensity"] = opt(s.intensity);
  j["valence"] = opt(s.valence);
  j["arousal"] = opt(s.arousal);
  j["nidf_matched"] = s.nidf_matched;
  j["intensity_matched"] = s.intensity_matched;
  j["vad_matched"] = s.vad_matched;
  return j;
}

UtteranceScore scores_from(const json& j) {
  UtteranceScore s;
  s.nidf_mean = opt_from(j, "nidf");
  s.intensity = opt_from(j, "intensity");
  s.valence = opt_from(j, "valence");
  s.arousal = opt_from(j, "arousal");
  s.nidf_matched = j.value("nidf_matched", std::size_t{0});
  s.intensity_matched = j.value("intensity_matched", std::size_t{0});
  s.vad_matched = j.value("vad_matched", std::size_t{0});
  return s;
}

std::string fmt(const char* f, double a, double b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt1(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string mean_sd_cell(const json& agg) {
  if (agg.is_null() || agg.at("mean").is_null()) return "n/a";
  const double m = agg.at("mean").get<double>();
  if (agg.at("sd").is_null()) return fmt1("%.2f", m);
  return fmt("%.2f \xC2\xB1 %.2f", m, agg.at("sd").get<double>());
}

const json* find_path(const json& j, std::initializer_list<const char*> path) {
  const json* cur = &j;
  for (const char* p : path) {
    if (!cur->is_object() || !cur->contains(p)) return nullptr;
    cur = &cur->at(p);
  }
  return cur;
}

std::string model_of(const json& r) { return r.at("model").get<std::string>(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

std::string number(double v) { return json(v).dump(); }

void compare(VerifyOutcome& out, const std::string& what, const std::optional<double>& reported,
             const std::optional<double>& recomputed, double tol) {
  ++out.checked;
  if (reported.has_value() != recomputed.has_value()) {
    out.mismatches.push_back(what + ": defined in one of report/recomputation only");
    return;
  }
  if (!reported) return;
  const double scale = std::fmax(1.0, std::fabs(*recomputed));
  if (std::fabs(*reported - *recomputed) > tol * scale) {
    char buf[160];
    std::snprintf(buf, sizeof buf, ": reported %.17g, recomputed %.17g", *reported, *recomputed);
    out.mismatches.push_back(what + buf);
  }
}

void compare_count(VerifyOutcome& out, const std::string& what, const json& reported, std::size_t recomputed) {
  ++out.checked;
  if (reported.get<std::size_t>() != recomputed) {
    out.mismatches.push_back(what + ": reported " + reported.dump() + ", recomputed " + std::to_string(recomputed));
  }
}

void compare_agg(VerifyOutcome& out, const std::string& what, const json& reported, const AggregateStat& a,
                 double tol) {
  compare(out, what + ".mean", opt_from(reported, "mean"), a.mean, tol);
  compare(out, what + ".sd", opt_from(reported, "sd"), a.sd, tol);
  compare(out, what + ".min", opt_from(reported, "min"), a.min, tol);
  compare(out, what + ".max", opt_from(reported, "max"), a.max, tol);
  compare_count(out, what + ".defined", reported.at("defined"), a.defined);
  compare_count(out, what + ".excluded", reported.at("excluded"), a.excluded);
}

}  // namespace

ordered_json example_json(const ExampleScore& s) {
  ordered_json j;
  j["dialogue_id"] = s.dialogue_id;
  j["response"] = s.response;
  j["chars"] = s.chars;
  j["tokens"] = s.tokens;
  j["specificity"] = opt(s.specificity);
  j["prompt"] = scores_json(s.prompt);
  j["response_scores"] = scores_json(s.response_scores);
  ordered_json sig, dist;
  for (Dim d : kDims) {
    const auto i = static_cast<std::size_t>(d);
    sig[kDimNames[i]] = opt(s.pair.signed_of(d));
    dist[kDimNames[i]] = opt(s.pair.distance(d));
  }
  j["signed"] = std::move(sig);
  j["distance"] = std::move(dist);
  return j;
}

ExampleScore example_from_json(const json& j) {
  ExampleScore s;
  s.dialogue_id = j.at("dialogue_id").get<std::string>();
  s.response = j.at("response").get<std::string>();
  s.chars = j.at("chars").get<std::size_t>();
  s.tokens = j.at("tokens").get<std::size_t>();
  s.specificity = opt_from(j, "specificity");
  s.prompt = scores_from(j.at("prompt"));
  s.response_scores = scores_from(j.at("response_scores"));
  for (std::size_t i = 0; i < 3; ++i) s.pair.signed_delta[i] = opt_from(j.at("signed"), kDimNames[i]);
  return s;
}

std::vector<ExampleScore> read_examples(std::istream& in) {
  std::vector<ExampleScore> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(example_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw SchemaError("per-example line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

ordered_json aggregate_json(const AggregateStat& a) {
  ordered_json j;
  j["mean"] = opt(a.mean);
  j["sd"] = opt(a.sd);
  j["min"] = opt(a.min);
  j["max"] = opt(a.max);
  j["defined"] = a.defined;
  j["excluded"] = a.excluded;
  return j;
}

ordered_json length_json(const LengthStats& s) {
  ordered_json j;
  j["mean_chars"] = s.mean_chars;
  j["median_chars"] = s.median_chars;
  j["mean_tokens"] = s.mean_tokens;
  j["n"] = s.n;
  return j;
}

ordered_json diversity_json(const DiversityReport& d) {
  ordered_json j;
  j["n_responses"] = d.n_responses;
  j["templates"] = d.templates;
  j["token_templates"] = d.token_templates;
  j["empty_token_responses"] = d.empty_token_responses;
  j["total_nodes_unfolded"] = d.total_nodes_unfolded;
  j["span_nodes_folded"] = d.span_nodes_folded;
  j["folded_nodes_total"] = d.folded_nodes_total;
  j["root_children_folded"] = d.root_children_folded;
  j["compression_pct"] = opt(d.compression_pct);
  j["unique_start_words"] = d.unique_start_words;
  j["cells"] = ordered_json{{"templates", d.templates_cell()},
                            {"span_nodes", d.span_cell()},
                            {"root_children", d.root_children_cell()},
                            {"compression", d.compression_cell()},
                            {"unique_start_words", std::to_string(d.unique_start_words)}};
  return j;
}

ordered_json diff_epitome_json(const DiffEpitome& d) {
  return ordered_json{{"er", d.er}, {"ex", d.ex}, {"ip", d.ip}, {"mean_of_three", d.mean_of_three}};
}

ordered_json similarity_json(const SimilarityAggregate& s) {
  return ordered_json{{"mean", s.mean}, {"sd", opt(s.sd)}, {"n", s.n}};
}

ordered_json test_result_json(const stats::TestResult& r) {
  ordered_json j;
  j["method"] = r.method;
  j["statistic"] = opt(r.statistic);
  j["p_value"] = r.p_value;
  j["df"] = opt(r.df);
  j["n_a"] = r.n_a;
  j["n_b"] = r.n_b;
  j["effect_size"] = opt(r.effect_size);
  j["effect_size_kind"] = r.effect_size_kind;
  j["alternative"] = stats::to_string(r.alternative);
  j["meta"] = r.meta;
  j["warnings"] = r.warnings;
  return j;
}

ordered_json build_report(const ReportParts& p) {
  ordered_json j;
  j["schema"] = kSchema;
  j["tool"] = ordered_json{{"name", kToolName}, {"version", kToolVersion}};
  j["model"] = p.config.model_name;
  j["config"] = to_json(p.config);
  j["per_example"] = kPerExampleFile;
  j["n_examples"] = p.n_examples;
  ordered_json agg = ordered_json::object();
  if (p.length) agg["length"] = length_json(*p.length);
  if (p.specificity) agg["specificity"] = aggregate_json(*p.specificity);
  if (p.iva) {
    ordered_json dist, sig;
    for (std::size_t i = 0; i < 3; ++i) {
      dist[kDimNames[i]] = aggregate_json(p.iva->distance[i]);
      sig[kDimNames[i]] = aggregate_json(p.iva->signed_delta[i]);
    }
    agg["iva"] = ordered_json{{"prompt_mode", to_string(p.config.prompt_mode)},
                              {"include_situation", p.config.include_situation},
                              {"distance", dist},
                              {"signed", sig}};
  }
  if (p.diversity) agg["diversity"] = diversity_json(*p.diversity);
  if (p.diff_per_example || p.similarity) {
    ordered_json ext = ordered_json::object();
    if (p.diff_per_example) {
      ext["diff_epitome"] = ordered_json{{"default_mode", to_string(p.config.diff_mode)},
                                         {"per_example", diff_epitome_json(*p.diff_per_example)},
                                         {"dataset_mean", diff_epitome_json(*p.diff_dataset_mean)}};
    }
    if (p.similarity) ext["similarity"] = similarity_json(*p.similarity);
    agg["external"] = std::move(ext);
  }
  j["aggregates"] = std::move(agg);
  auto st = ordered_json::array();
  for (const auto& t : p.stats) {
    auto r = test_result_json(t.result);
    ordered_json entry;
    entry["label"] = t.label;
    for (auto& [k, v] : r.items()) entry[k] = v;
    st.push_back(std::move(entry));
  }
  j["stats"] = std::move(st);
  j["warnings"] = p.warnings;
  return j;
}

void check_schema(const json& j) {
  if (!j.is_object()) throw SchemaError("report is not a JSON object");
  if (!j.contains("schema") || !j.at("schema").is_string() || j.at("schema").get<std::string>() != kSchema) {
    throw SchemaError("unsupported report schema (expected " + std::string(kSchema) + ")");
  }
  for (const char* key : {"tool", "model", "config", "per_example", "n_examples", "aggregates", "stats", "warnings"}) {
    if (!j.contains(key)) throw SchemaError(std::string("report is missing '") + key + "'");
  }
  if (!j.at("aggregates").is_object()) throw SchemaError("'aggregates' is not an object");
}

VerifyOutcome verify_report(const json& report, std::span<const ExampleScore> rows, double tol) {
  check_schema(report);
  VerifyOutcome out;
  compare_count(out, "n_examples", report.at("n_examples"), rows.size());
  const auto& agg = report.at("aggregates");

  if (agg.contains("length")) {
    const auto& l = agg.at("length");
    if (rows.empty()) {
      out.mismatches.push_back("length: report has statistics but there are no rows");
    } else {
      const auto s = length_stats_from_scores(rows);
      compare(out, "length.mean_chars", l.at("mean_chars").get<double>(), s.mean_chars, tol);
      compare(out, "length.median_chars", l.at("median_chars").get<double>(), s.median_chars, tol);
      compare(out, "length.mean_tokens", l.at("mean_tokens").get<double>(), s.mean_tokens, tol);
      compare_count(out, "length.n", l.at("n"), s.n);
    }
  }
  if (agg.contains("specificity") || agg.contains("iva")) {
    const auto f = aggregate_feature_report(rows);
    if (agg.contains("specificity")) compare_agg(out, "specificity", agg.at("specificity"), f.specificity, tol);
    if (agg.contains("iva")) {
      for (std::size_t i = 0; i < 3; ++i) {
        compare_agg(out, std::string("iva.distance.") + kDimNames[i], agg.at("iva").at("distance").at(kDimNames[i]),
                    f.distance[i], tol);
        compare_agg(out, std::string("iva.signed.") + kDimNames[i], agg.at("iva").at("signed").at(kDimNames[i]),
                    f.signed_delta[i], tol);
      }
    }
  }
  if (agg.contains("diversity")) {
    std::vector<std::string> responses;
    responses.reserve(rows.size());
    for (const auto& r : rows) responses.push_back(r.response);
    if (responses.empty()) {
      out.mismatches.push_back("diversity: report has statistics but there are no rows");
    } else {
      const auto d = diversity_report(responses);
      const auto& rep = agg.at("diversity");
      compare_count(out, "diversity.n_responses", rep.at("n_responses"), d.n_responses);
      compare_count(out, "diversity.templates", rep.at("templates"), d.templates);
      compare_count(out, "diversity.total_nodes_unfolded", rep.at("total_nodes_unfolded"), d.total_nodes_unfolded);
      compare_count(out, "diversity.span_nodes_folded", rep.at("span_nodes_folded"), d.span_nodes_folded);
      compare_count(out, "diversity.folded_nodes_total", rep.at("folded_nodes_total"), d.folded_nodes_total);
      compare_count(out, "diversity.root_children_folded", rep.at("root_children_folded"), d.root_children_folded);
      compare_count(out, "diversity.unique_start_words", rep.at("unique_start_words"), d.unique_start_words);
      compare(out, "diversity.compression_pct", opt_from(rep, "compression_pct"), d.compression_pct, tol);
    }
  }
  return out;
}

std::string render_markdown(std::span<const json> reports) {
  for (const auto& r : reports) check_schema(r);
  std::ostringstream md;

  md << "## Diversity\n\n"
     << "| Model | # Templates | # Span Nodes / Total # Nodes | # Children From Root | Compression Ratio | "
        "# Unique Start Words |\n"
     << "|---|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    const json* c = find_path(r, {"aggregates", "diversity", "cells"});
    md << "| " << model_of(r);
    for (const char* k : {"templates", "span_nodes", "root_children", "compression", "unique_start_words"}) {
      md << " | " << (c ? c->at(k).get<std::string>() : "n/a");
    }
    md << " |\n";
  }

  md << "\n## Specificity and word choice\n\n"
     << "| Model | NIDF | I | V | A |\n"
     << "|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    md << "| " << model_of(r);
    const json* s = find_path(r, {"aggregates", "specificity"});
    md << " | " << (s ? mean_sd_cell(*s) : "n/a");
    for (const char* d : kDimNames) {
      const json* a = find_path(r, {"aggregates", "iva", "distance", d});
      md << " | " << (a ? mean_sd_cell(*a) : "n/a");
    }
    md << " |\n";
  }

  md << "\n## Length\n\n"
     << "| Model | Mean chars | Median chars | Mean tokens | N |\n"
     << "|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    md << "| " << model_of(r);
    if (const json* l = find_path(r, {"aggregates", "length"})) {
      md << " | " << fmt1("%.1f", l->at("mean_chars").get<double>()) << " | "
         << fmt1("%.1f", l->at("median_chars").get<double>()) << " | "
         << fmt1("%.1f", l->at("mean_tokens").get<double>()) << " | " << l->at("n").get<std::size_t>() << " |\n";
    } else {
      md << " | n/a | n/a | n/a | n/a |\n";
    }
  }

  bool any_external = false;
  for (const auto& r : reports) any_external = any_external || find_path(r, {"aggregates", "external"});
  if (any_external) {
    md << "\n## Empathy and similarity\n\n"
       << "| Model | diff-ER | diff-EX | diff-IP | mean diff-Epitome | diff-Epitome (dataset mean) | FBert |\n"
       << "|---|---|---|---|---|---|---|\n";
    for (const auto& r : reports) {
      md << "| " << model_of(r);
      const json* d = find_path(r, {"aggregates", "external", "diff_epitome"});
      if (d) {
        const auto& pe = d->at("per_example");
        for (const char* k : {"er", "ex", "ip", "mean_of_three"}) md << " | " << fmt1("%.3f", pe.at(k).get<double>());
        md << " | " << fmt1("%.3f", d->at("dataset_mean").at("mean_of_three").get<double>());
      } else {
        md << " | n/a | n/a | n/a | n/a | n/a";
      }
      const json* s = find_path(r, {"aggregates", "external", "similarity"});
      if (s && !s->at("sd").is_null()) {
        md << " | " << fmt("%.3f \xC2\xB1 %.3f", s->at("mean").get<double>(), s->at("sd").get<double>());
      } else if (s) {
        md << " | " << fmt1("%.3f", s->at("mean").get<double>());
      } else {
        md << " | n/a";
      }
      md << " |\n";
    }
  }

  bool any_stats = false;
  for (const auto& r : reports) any_stats = any_stats || !r.at("stats").empty();
  if (any_stats) {
    md << "\n## Significance tests\n\n"
       << "| Model | Test | Method | Statistic | df | p | Effect size |\n"
       << "|---|---|---|---|---|---|---|\n";
    for (const auto& r : reports) {
      for (const auto& t : r.at("stats")) {
        const auto stat = opt_from(t, "statistic");
        const auto df = opt_from(t, "df");
        const auto es = opt_from(t, "effect_size");
        md << "| " << model_of(r) << " | " << t.at("label").get<std::string>() << " | "
           << t.at("method").get<std::string>() << " | " << (stat ? fmt1("%.3f", *stat) : "n/a") << " | "
           << (df ? fmt1("%.2f", *df) : "n/a") << " | " << fmt1("%.3g", t.at("p_value").get<double>()) << " | "
           << (es ? fmt1("%.3f", *es) : "n/a") << " |\n";
      }
    }
  }
  return md.str();
}

std::string render_csv(std::span<const json> reports, std::string_view table) {
  for (const auto& r : reports) check_schema(r);
  std::ostringstream out;
  if (table == "diversity") {
    out << "Model,# Templates,# Span Nodes / Total # Nodes,# Children From Root,Compression Ratio,"
           "# Unique Start Words\n";
    for (const auto& r : reports) {
      const json* c = find_path(r, {"aggregates", "diversity", "cells"});
      out << csv_field(model_of(r));
      for (const char* k : {"templates", "span_nodes", "root_children", "compression", "unique_start_words"}) {
        out << ',' << csv_field(c ? c->at(k).get<std::string>() : "n/a");
      }
      out << '\n';
    }
  } else if (table == "features") {
    out << "Model,metric,mean,sd,defined,excluded\n";
    for (const auto& r : reports) {
      auto row = [&](const std::string& name, const json* a) {
        if (!a) return;
        const auto m = opt_from(*a, "mean");
        const auto s = opt_from(*a, "sd");
        out << csv_field(model_of(r)) << ',' << name << ',' << (m ? number(*m) : "") << ',' << (s ? number(*s) : "")
            << ',' << a->at("defined").get<std::size_t>() << ',' << a->at("excluded").get<std::size_t>() << '\n';
      };
      row("NIDF", find_path(r, {"aggregates", "specificity"}));
      for (const char* d : kDimNames) {
        row(std::string(d) + "_distance", find_path(r, {"aggregates", "iva", "distance", d}));
      }
      for (const char* d : kDimNames) row(std::string(d) + "_signed", find_path(r, {"aggregates", "iva", "signed", d}));
    }
  } else if (table == "length") {
    out << "Model,mean_chars,median_chars,mean_tokens,n\n";
    for (const auto& r : reports) {
      const json* l = find_path(r, {"aggregates", "length"});
      if (!l) continue;
      out << csv_field(model_of(r)) << ',' << number(l->at("mean_chars").get<double>()) << ','
          << number(l->at("median_chars").get<double>()) << ',' << number(l->at("mean_tokens").get<double>()) << ','
          << l->at("n").get<std::size_t>() << '\n';
    }
  } else if (table == "external") {
    out << "Model,diff_er,diff_ex,diff_ip,diff_mean_of_three,diff_mean_of_three_dataset_mean,fbert_mean,fbert_sd\n";
    for (const auto& r : reports) {
      const json* d = find_path(r, {"aggregates", "external", "diff_epitome"});
      const json* s = find_path(r, {"aggregates", "external", "similarity"});
      if (!d && !s) continue;
      out << csv_field(model_of(r));
      for (const char* k : {"er", "ex", "ip", "mean_of_three"}) {
        out << ',' << (d ? number(d->at("per_example").at(k).get<double>()) : "");
      }
      out << ',' << (d ? number(d->at("dataset_mean").at("mean_of_three").get<double>()) : "");
      const auto sd = s ? opt_from(*s, "sd") : std::nullopt;
      out << ',' << (s ? number(s->at("mean").get<double>()) : "") << ',' << (sd ? number(*sd) : "") << '\n';
    }
  } else {
    throw std::invalid_argument("unknown table '" + std::string(table) +
                                "' (expected diversity, features, length or external)");
  }
  return out.str();
}

std::string render_plotdata(std::span<const json> reports, std::span<const std::vector<ExampleScore>> rows) {
  if (reports.size() != rows.size()) throw std::invalid_argument("render_plotdata: one row set per report");
  std::ostringstream out;
  out << "value,model,metric\n";
  for (std::size_t k = 0; k < reports.size(); ++k) {
    check_schema(reports[k]);
    const auto& agg = reports[k].at("aggregates");
    const std::string model = csv_field(model_of(reports[k]));
    for (const auto& s : rows[k]) {
      if (agg.contains("specificity") && s.specificity) {
        out << number(*s.specificity) << ',' << model << ",specificity\n";
      }
      if (agg.contains("iva")) {
        for (Dim d : kDims) {
          const auto i = static_cast<std::size_t>(d);
          if (auto v = s.pair.distance(d)) out << number(*v) << ',' << model << ',' << kDimNames[i] << "_distance\n";
        }
        for (Dim d : kDims) {
          const auto i = static_cast<std::size_t>(d);
          if (auto v = s.pair.signed_of(d)) out << number(*v) << ',' << model << ',' << kDimNames[i] << "_signed\n";
        }
      }
      if (agg.contains("length")) out << s.chars << ',' << model << ",chars\n";
    }
  }
  return out.str();
}

}  // namespace polarpref::report
