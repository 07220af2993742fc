#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "cvc/core.hpp"
#include "cvc/engine.hpp"
#include "cvc/simulate.hpp"
#include "cvc/testing.hpp"

namespace cvc {

using json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "cvc-report/1";

/// JSON has no infinities; they become null and callers record why.
inline json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline const char* contrast_name(Contrast c) {
  switch (c) {
    case Contrast::regular: return "regular";
    case Contrast::no_contrast: return "no_contrast";
    case Contrast::dominated: return "dominated";
  }
  return "regular";
}

inline const char* noise_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::student_t3: return "t3";
    case NoiseKind::none: return "none";
  }
  return "gaussian";
}

inline json to_json(const ScreenSet& s) {
  return {{"skipped", s.skipped},
          {"threshold", number_or_null(s.threshold)},
          {"kept", s.kept}};
}

inline json to_json(const PValueRecord& r) {
  return {{"t_stat", number_or_null(r.t_stat)},
          {"contrast", contrast_name(r.contrast)},
          {"p_value", r.p_value},
          {"B", r.B},
          {"screen", to_json(r.screen)}};
}

/// Subset terms map index 0 to "(Intercept)" and k to the k-th feature name.
inline json candidate_json(const CandidateModel& c,
                           const std::vector<std::string>& feature_names = {}) {
  json j{{"id", c.id}};
  if (c.is_lambda()) {
    j["type"] = "lambda";
    j["lambda"] = c.lambda();
  } else {
    j["type"] = "subset";
    j["terms"] = c.subset().terms;
    json names = json::array();
    for (int t : c.subset().terms) {
      if (t == 0) names.push_back("(Intercept)");
      else if (static_cast<std::size_t>(t) <= feature_names.size())
        names.push_back(feature_names[static_cast<std::size_t>(t - 1)]);
      else names.push_back("x" + std::to_string(t));
    }
    j["labels"] = std::move(names);
  }
  return j;
}

inline json to_json(const CvcConfig& c) {
  json j{{"mode", c.mode == SplitMode::v_fold ? "v_fold" : "sample_split"},
         {"folds", c.folds},
         {"alpha", c.alpha},
         {"alpha_prime", c.screening_level()},
         {"screen", c.screen},
         {"bootstrap", c.B},
         {"seed", c.seed}};
  if (c.mode == SplitMode::sample_split) j["train_fraction"] = c.train_fraction;
  return j;
}

/// Per-candidate rows plus the set and the selections.
inline json to_json(const CvcResult& res, std::span<const CandidateModel> candidates,
                    const std::vector<std::string>& feature_names = {}) {
  json rows = json::array();
  for (std::size_t m = 0; m < res.pvalues.size(); ++m) {
    json row = candidate_json(candidates[m], feature_names);
    row["mean_loss"] = res.loss_means(static_cast<Eigen::Index>(m));
    row["in_set"] = res.contains(static_cast<int>(m));
    row["test"] = to_json(res.pvalues[m]);
    rows.push_back(std::move(row));
  }
  json j{{"candidates", std::move(rows)},
         {"confidence_set", res.confidence_set},
         {"empty_set_fallback", res.empty_set_fallback},
         {"cv_choice", res.cv_choice}};
  if (res.parsimonious_choice) j["cvc_choice"] = *res.parsimonious_choice;
  return j;
}

inline json to_json(const LinearModel& m, const std::vector<std::string>& names) {
  json coef = json::object();
  for (Eigen::Index k = 0; k < m.coefficients.size(); ++k) {
    const auto key = static_cast<std::size_t>(k) < names.size()
                         ? names[static_cast<std::size_t>(k)]
                         : "x" + std::to_string(k + 1);
    coef[key] = m.coefficients(k);
  }
  return {{"intercept", m.intercept},
          {"coefficients", std::move(coef)},
          {"nonzeros", m.nonzeros()},
          {"converged", m.converged}};
}

inline json to_json(const MethodOutcome& o) {
  return {{"lambda", o.lambda}, {"risk", o.risk}, {"size", o.size}};
}

inline json to_json(const MethodSummary& s) {
  return {{"median_risk", s.median_risk}, {"median_size", s.median_size}};
}

inline json to_json(const Sim1Config& c) {
  json j{{"n", c.n},
         {"beta", c.beta},
         {"noise", noise_name(c.noise)},
         {"noise_scale", c.noise_scale},
         {"reps", c.reps},
         {"seed", c.seed}};
  j["cvc"] = to_json(c.cvc());
  return j;
}

inline json to_json(const Sim1Report& r) {
  json recs = json::array();
  for (const auto& rec : r.records) {
    json j{{"cv_choice", rec.cv_choice},
           {"cvc_choice", rec.cvc_choice},
           {"set_size", rec.set_size},
           {"true_in_set", rec.true_in_set}};
    if (rec.error) j["error"] = *rec.error;
    recs.push_back(std::move(j));
  }
  return {{"config", to_json(r.config)},
          {"true_model", r.true_model},
          {"cv_rate", r.cv_rate},
          {"cvc_rate", r.cvc_rate},
          {"mean_set_size", r.mean_set_size},
          {"median_set_size", r.median_set_size},
          {"errors", r.errors},
          {"records", std::move(recs)}};
}

inline const char* sigma_name(SigmaKind k) {
  return k == SigmaKind::identity ? "identity" : "correlated";
}

inline const char* beta_name(BetaKind k) {
  return k == BetaKind::sparse ? "sparse" : "dense";
}

inline json to_json(const Sim2Config& c) {
  json j{{"n", c.n},
         {"p", c.p},
         {"sigma", sigma_name(c.sigma)},
         {"beta", beta_name(c.beta)},
         {"reps", c.reps},
         {"path_length", c.K},
         {"seed", c.seed}};
  j["cvc"] = to_json(c.cvc());
  return j;
}

inline json to_json(const Sim2Report& r) {
  json recs = json::array();
  for (const auto& rec : r.records)
    recs.push_back({{"cv", to_json(rec.cv)},
                    {"cvc", to_json(rec.cvc)},
                    {"one_se", to_json(rec.one_se)},
                    {"oracle_lambda", rec.oracle_lambda},
                    {"oracle_risk", rec.oracle_risk},
                    {"covered", rec.covered},
                    {"fold_oracle_lambda", rec.fold_oracle_lambda},
                    {"fold_covered", rec.fold_covered},
                    {"set_size", rec.set_size},
                    {"unconverged_fits", rec.unconverged_fits}});
  return {{"config", to_json(r.config)},
          {"cv", to_json(r.cv)},
          {"cvc", to_json(r.cvc)},
          {"one_se", to_json(r.one_se)},
          {"coverage", r.coverage},
          {"fold_coverage", r.fold_coverage},
          {"median_set_size", r.median_set_size},
          {"records", std::move(recs)}};
}

inline json to_json(const HoldoutConfig& c) {
  json j{{"train_size", c.train_size},
         {"reps", c.reps},
         {"path_length", c.K},
         {"seed", c.seed}};
  j["cvc"] = to_json(c.cvc());
  return j;
}

inline json to_json(const HoldoutReport& r) {
  json recs = json::array();
  for (const auto& rec : r.records)
    recs.push_back({{"cv", to_json(rec.cv)},
                    {"cvc", to_json(rec.cvc)},
                    {"one_se", to_json(rec.one_se)},
                    {"set_size", rec.set_size},
                    {"test_size", rec.test_size}});
  return {{"config", to_json(r.config)},
          {"cv", to_json(r.cv)},
          {"cvc", to_json(r.cvc)},
          {"one_se", to_json(r.one_se)},
          {"records", std::move(recs)}};
}

/// Top-level document. The result payload never contains timestamps, so it
/// is identical across reruns with the same configuration.
inline json make_report(const std::string& kind, json manifest, json result) {
  return {{"schema", kReportSchema},
          {"kind", kind},
          {"manifest", std::move(manifest)},
          {"result", std::move(result)}};
}

}  // namespace cvc
