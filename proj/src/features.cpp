#include "polarpref/features.hpp"

#include <algorithm>
#include <stdexcept>

#include "polarpref/numeric.hpp"
#include "polarpref/text.hpp"

namespace polarpref {

std::string_view to_string(Dim d) {
  switch (d) {
    case Dim::intensity: return "intensity";
    case Dim::valence: return "valence";
    case Dim::arousal: return "arousal";
  }
  return "?";
}

std::optional<double> UtteranceScore::get(Dim d) const {
  switch (d) {
    case Dim::intensity: return intensity;
    case Dim::valence: return valence;
    case Dim::arousal: return arousal;
  }
  return std::nullopt;
}

std::optional<double> PairScore::distance(Dim d) const {
  const auto s = signed_of(d);
  if (!s) return std::nullopt;
  return std::fabs(*s);
}

std::optional<double> specificity_tokens(std::span<const std::string> tokens, const NidfTable& table) {
  numeric::CompensatedSum sum;
  std::size_t n = 0;
  for (const auto& t : tokens) {
    if (const auto* e = table.find(t)) {
      sum.add(e->nidf);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum.value() / static_cast<double>(n);
}

std::optional<double> specificity(std::string_view response, const NidfTable& table) {
  const auto tokens = text::tokenize(response);
  return specificity_tokens(tokens, table);
}

UtteranceScore word_scores_tokens(std::span<const std::string> tokens, const WordLexicons& lex) {
  numeric::CompensatedSum i_sum, v_sum, a_sum;
  UtteranceScore s;
  for (const auto& t : tokens) {
    if (lex.intensity != nullptr) {
      if (const double* i = lex.intensity->find(t)) {
        i_sum.add(*i);
        ++s.intensity_matched;
      }
    }
    if (lex.vad != nullptr) {
      if (const Vad* v = lex.vad->find(t)) {
        v_sum.add(v->valence);
        a_sum.add(v->arousal);
        ++s.vad_matched;
      }
    }
  }
  if (s.intensity_matched > 0) s.intensity = i_sum.value() / static_cast<double>(s.intensity_matched);
  if (s.vad_matched > 0) {
    s.valence = v_sum.value() / static_cast<double>(s.vad_matched);
    s.arousal = a_sum.value() / static_cast<double>(s.vad_matched);
  }
  return s;
}

UtteranceScore word_scores(std::string_view text, const WordLexicons& lex) {
  const auto tokens = text::tokenize(text);
  return word_scores_tokens(tokens, lex);
}

PairScore pair_from_scores(const UtteranceScore& prompt, const UtteranceScore& response) {
  PairScore p;
  for (Dim d : kDims) {
    const auto a = prompt.get(d);
    const auto b = response.get(d);
    if (a && b) p.signed_delta[static_cast<std::size_t>(d)] = *a - *b;
  }
  return p;
}

PairScore iva_pair(std::string_view prompt_text, std::string_view response_text, const WordLexicons& lex) {
  return pair_from_scores(word_scores(prompt_text, lex), word_scores(response_text, lex));
}

std::string_view to_string(PromptMode m) {
  switch (m) {
    case PromptMode::all_context: return "all-context";
    case PromptMode::last_user_turn: return "last-user-turn";
    case PromptMode::per_turn_mean: return "per-turn-mean";
  }
  return "?";
}

PromptMode prompt_mode_from_string(std::string_view s) {
  if (s == "all-context") return PromptMode::all_context;
  if (s == "last-user-turn") return PromptMode::last_user_turn;
  if (s == "per-turn-mean") return PromptMode::per_turn_mean;
  throw std::invalid_argument("unknown prompt mode '" + std::string(s) + "'");
}

std::string prompt_of(std::span<const Turn> context) {
  if (context.empty()) throw std::invalid_argument("prompt_of: empty context");
  std::string out;
  for (const auto& t : context) {
    if (!out.empty()) out.push_back(' ');
    out += t.text;
  }
  return out;
}

UtteranceScore prompt_scores(std::span<const Turn> context, PromptMode mode, const WordLexicons& lex,
                             const std::optional<std::string>& situation) {
  if (context.empty()) throw std::invalid_argument("prompt_scores: empty context");
  std::vector<std::string> parts;
  if (situation && !situation->empty()) parts.push_back(*situation);

  switch (mode) {
    case PromptMode::all_context: {
      parts.push_back(prompt_of(context));
      std::string joined;
      for (const auto& p : parts) {
        if (!joined.empty()) joined.push_back(' ');
        joined += p;
      }
      return word_scores(joined, lex);
    }
    case PromptMode::last_user_turn: {
      auto it = std::find_if(context.rbegin(), context.rend(), [](const Turn& t) { return t.role == Role::speaker; });
      parts.push_back(it == context.rend() ? context.back().text : it->text);
      std::string joined;
      for (const auto& p : parts) {
        if (!joined.empty()) joined.push_back(' ');
        joined += p;
      }
      return word_scores(joined, lex);
    }
    case PromptMode::per_turn_mean: {
      for (const auto& t : context) parts.push_back(t.text);
      numeric::CompensatedSum i_sum, v_sum, a_sum;
      std::size_t i_n = 0, va_n = 0;
      UtteranceScore out;
      for (const auto& p : parts) {
        const auto s = word_scores(p, lex);
        out.intensity_matched += s.intensity_matched;
        out.vad_matched += s.vad_matched;
        if (s.intensity) {
          i_sum.add(*s.intensity);
          ++i_n;
        }
        if (s.valence) {
          v_sum.add(*s.valence);
          a_sum.add(*s.arousal);
          ++va_n;
        }
      }
      if (i_n > 0) out.intensity = i_sum.value() / static_cast<double>(i_n);
      if (va_n > 0) {
        out.valence = v_sum.value() / static_cast<double>(va_n);
        out.arousal = a_sum.value() / static_cast<double>(va_n);
      }
      return out;
    }
  }
  throw std::logic_error("unhandled prompt mode");
}

namespace {

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

LengthStats length_stats_from_counts(std::span<const double> chars, std::span<const double> tokens) {
  if (chars.empty()) throw std::invalid_argument("length_stats: empty response list");
  LengthStats s;
  s.n = chars.size();
  s.mean_chars = numeric::mean(chars);
  s.median_chars = median_of({chars.begin(), chars.end()});
  s.mean_tokens = numeric::mean(tokens);
  return s;
}

}  // namespace

LengthStats length_stats(std::span<const std::string> responses) {
  std::vector<double> chars, tokens;
  chars.reserve(responses.size());
  tokens.reserve(responses.size());
  for (const auto& r : responses) {
    chars.push_back(static_cast<double>(text::scalar_count(r)));
    tokens.push_back(static_cast<double>(text::tokenize(r).size()));
  }
  return length_stats_from_counts(chars, tokens);
}

LengthStats length_stats_from_scores(std::span<const ExampleScore> scores) {
  std::vector<double> chars, tokens;
  for (const auto& s : scores) {
    chars.push_back(static_cast<double>(s.chars));
    tokens.push_back(static_cast<double>(s.tokens));
  }
  return length_stats_from_counts(chars, tokens);
}

std::vector<ExampleScore> score_examples(std::span<const EvalItem> items, const ScoringSetup& setup, Exec exec) {
  std::vector<ExampleScore> out(items.size());
  const bool word_choice = setup.lex.vad != nullptr || setup.lex.intensity != nullptr;

  auto score_one = [&](std::ptrdiff_t k) {
    const EvalItem& item = items[static_cast<std::size_t>(k)];
    ExampleScore& s = out[static_cast<std::size_t>(k)];
    s.dialogue_id = item.dialogue_id;
    s.response = item.response;
    s.chars = text::scalar_count(item.response);
    const auto tokens = text::tokenize(item.response);
    s.tokens = tokens.size();
    if (setup.nidf != nullptr) {
      s.specificity = specificity_tokens(tokens, *setup.nidf);
      s.response_scores.nidf_mean = s.specificity;
    }
    if (word_choice) {
      auto nidf = s.response_scores.nidf_mean;
      s.response_scores = word_scores_tokens(tokens, setup.lex);
      s.response_scores.nidf_mean = nidf;
      if (!item.context.empty()) {
        const auto situation = setup.include_situation ? item.situation : std::nullopt;
        s.prompt = prompt_scores(item.context, setup.mode, setup.lex, situation);
        s.pair = pair_from_scores(s.prompt, s.response_scores);
      }
    }
  };

  const auto n = static_cast<std::ptrdiff_t>(items.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t k = 0; k < n; ++k) score_one(k);
  } else {
    for (std::ptrdiff_t k = 0; k < n; ++k) score_one(k);
  }
  return out;
}

AggregateStat aggregate(std::span<const std::optional<double>> values) {
  std::vector<double> defined;
  defined.reserve(values.size());
  for (const auto& v : values) {
    if (v) defined.push_back(*v);
  }
  AggregateStat a;
  a.defined = defined.size();
  a.excluded = values.size() - defined.size();
  if (defined.empty()) return a;
  a.mean = numeric::mean(defined);
  if (defined.size() >= 2) a.sd = std::sqrt(numeric::variance(defined));
  const auto [lo, hi] = std::minmax_element(defined.begin(), defined.end());
  a.min = *lo;
  a.max = *hi;
  // Rounding can push a mean of identical values one ulp outside [min, max].
  a.mean = std::clamp(*a.mean, *a.min, *a.max);
  return a;
}

FeatureAggregate aggregate_feature_report(std::span<const ExampleScore> scores) {
  FeatureAggregate agg;
  agg.n = scores.size();
  std::vector<std::optional<double>> col(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) col[i] = scores[i].specificity;
  agg.specificity = aggregate(col);
  for (Dim d : kDims) {
    const auto k = static_cast<std::size_t>(d);
    for (std::size_t i = 0; i < scores.size(); ++i) col[i] = scores[i].pair.distance(d);
    agg.distance[k] = aggregate(col);
    for (std::size_t i = 0; i < scores.size(); ++i) col[i] = scores[i].pair.signed_of(d);
    agg.signed_delta[k] = aggregate(col);
  }
  return agg;
}

}  // namespace polarpref
