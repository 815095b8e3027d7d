#include "fairaudit/serialize.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "fairaudit/error.hpp"

namespace fairaudit {
namespace {

using nlohmann::json;

json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double get_real(const json& j, const char* key) {
  const json& v = j.at(key);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

json reals(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) out.push_back(real(v));
  return out;
}

std::vector<double> get_reals(const json& j, const char* key) {
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    out.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
  }
  return out;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

void to_json(json& j, const ThresholdPolicy& v) { j = v.name(); }
void from_json(const json& j, ThresholdPolicy& v) { v = ThresholdPolicy::parse(j.get<std::string>()); }

void to_json(json& j, const OperatingPoint& v) {
  j = {{"policy", v.policy},
       {"tau", real(v.tau)},
       {"far", real(v.far)},
       {"frr", real(v.frr)},
       {"false_accepts", v.false_accepts},
       {"false_rejects", v.false_rejects},
       {"genuine_count", v.genuine_count},
       {"impostor_count", v.impostor_count}};
}
void from_json(const json& j, OperatingPoint& v) {
  v.policy = j.at("policy").get<ThresholdPolicy>();
  v.tau = get_real(j, "tau");
  v.far = get_real(j, "far");
  v.frr = get_real(j, "frr");
  v.false_accepts = j.at("false_accepts").get<std::size_t>();
  v.false_rejects = j.at("false_rejects").get<std::size_t>();
  v.genuine_count = j.at("genuine_count").get<std::size_t>();
  v.impostor_count = j.at("impostor_count").get<std::size_t>();
}

void to_json(json& j, const IndividualRates& v) {
  j = {{"identity_id", v.identity_id},
       {"far", real(v.far)},
       {"frr", real(v.frr)},
       {"genuine_count", v.genuine_count},
       {"impostor_count", v.impostor_count},
       {"false_accepts", v.false_accepts},
       {"false_rejects", v.false_rejects}};
}
void from_json(const json& j, IndividualRates& v) {
  v.identity_id = j.at("identity_id").get<std::string>();
  v.far = get_real(j, "far");
  v.frr = get_real(j, "frr");
  v.genuine_count = j.at("genuine_count").get<std::size_t>();
  v.impostor_count = j.at("impostor_count").get<std::size_t>();
  v.false_accepts = j.at("false_accepts").get<std::size_t>();
  v.false_rejects = j.at("false_rejects").get<std::size_t>();
}

void to_json(json& j, const Exclusion& v) {
  j = {{"identity_id", v.identity_id}, {"reason", v.reason}};
}
void from_json(const json& j, Exclusion& v) {
  v.identity_id = j.at("identity_id").get<std::string>();
  v.reason = j.at("reason").get<std::string>();
}

void to_json(json& j, const IndividualRatesResult& v) {
  j = {{"rates", v.rates}, {"excluded", v.excluded}};
}
void from_json(const json& j, IndividualRatesResult& v) {
  v.rates = j.at("rates").get<std::vector<IndividualRates>>();
  v.excluded = j.at("excluded").get<std::vector<Exclusion>>();
}

void to_json(json& j, const GroupKey& v) {
  j = json::array();
  for (const auto& l : v.levels) j.push_back(optional_json(l));
}
void from_json(const json& j, GroupKey& v) {
  v.levels.clear();
  for (const auto& l : j) {
    v.levels.push_back(l.is_null() ? std::nullopt : std::optional<int>(l.get<int>()));
  }
}

void to_json(json& j, const GroupSpec& v) {
  j = {{"attributes", v.attributes}, {"attribute_index", v.attribute_index}, {"groups", v.groups}};
}
void from_json(const json& j, GroupSpec& v) {
  v.attributes = j.at("attributes").get<std::vector<std::string>>();
  v.attribute_index = j.at("attribute_index").get<std::vector<std::size_t>>();
  v.groups = j.at("groups").get<std::vector<GroupKey>>();
}

void to_json(json& j, const GroupRates& v) {
  j = {{"key", v.key},
       {"label", v.label},
       {"far", real(v.far)},
       {"frr", real(v.frr)},
       {"member_count", v.member_count}};
}
void from_json(const json& j, GroupRates& v) {
  v.key = j.at("key").get<GroupKey>();
  v.label = j.at("label").get<std::string>();
  v.far = get_real(j, "far");
  v.frr = get_real(j, "frr");
  v.member_count = j.at("member_count").get<std::size_t>();
}

void to_json(json& j, const GroupRatesResult& v) {
  j = {{"spec", v.spec}, {"groups", v.groups}, {"unassigned", v.unassigned}};
}
void from_json(const json& j, GroupRatesResult& v) {
  v.spec = j.at("spec").get<GroupSpec>();
  v.groups = j.at("groups").get<std::vector<GroupRates>>();
  v.unassigned = j.at("unassigned").get<std::vector<std::string>>();
}

void to_json(json& j, const FairnessDelta& v) {
  j = {{"group_i", v.group_i},
       {"group_j", v.group_j},
       {"delta_far", real(v.delta_far)},
       {"delta_frr", real(v.delta_frr)}};
}
void from_json(const json& j, FairnessDelta& v) {
  v.group_i = j.at("group_i").get<std::string>();
  v.group_j = j.at("group_j").get<std::string>();
  v.delta_far = get_real(j, "delta_far");
  v.delta_frr = get_real(j, "delta_frr");
}

void to_json(json& j, const PValueMatrix& v) {
  j = {{"metric", std::string(metric_name(v.metric))},
       {"labels", v.labels},
       {"p_values", reals(v.p_values)},
       {"h_values", reals(v.h_values)}};
}
void from_json(const json& j, PValueMatrix& v) {
  v.metric = parse_metric(j.at("metric").get<std::string>());
  v.labels = j.at("labels").get<std::vector<std::string>>();
  v.p_values = get_reals(j, "p_values");
  v.h_values = get_reals(j, "h_values");
  const std::size_t n = v.labels.size();
  if (v.p_values.size() != n * n || v.h_values.size() != n * n) {
    throw_data("report", "kruskal matrix shape does not match its labels");
  }
}

void to_json(json& j, const ColumnCorrelation& v) {
  j = {{"column", v.column}, {"note", v.note}};
  j["result"] = v.result ? json(*v.result) : json(nullptr);
}
void from_json(const json& j, ColumnCorrelation& v) {
  v.column = j.at("column").get<std::string>();
  v.note = j.at("note").get<std::string>();
  v.result = get_optional<stats::CorrelationResult>(j, "result");
}

void to_json(json& j, const RegressionOutcome& v) {
  j = {{"fit", v.fit}, {"dropped_columns", v.dropped_columns}};
}
void from_json(const json& j, RegressionOutcome& v) {
  v.fit = j.at("fit").get<stats::RegressionFit>();
  v.dropped_columns = j.at("dropped_columns").get<std::vector<std::string>>();
}

void to_json(json& j, const ExplanatoryReport& v) {
  j = {{"dependent", std::string(metric_name(v.dependent))},
       {"operating_point", v.operating_point},
       {"individuals", v.individuals},
       {"standardized", v.standardized},
       {"correlations", v.correlations},
       {"regression", v.regression},
       {"excluded", v.excluded},
       {"notes", v.notes}};
}
void from_json(const json& j, ExplanatoryReport& v) {
  v.dependent = parse_metric(j.at("dependent").get<std::string>());
  v.operating_point = j.at("operating_point").get<OperatingPoint>();
  v.individuals = j.at("individuals").get<std::size_t>();
  v.standardized = j.at("standardized").get<bool>();
  v.correlations = j.at("correlations").get<std::vector<ColumnCorrelation>>();
  v.regression = j.at("regression").get<RegressionOutcome>();
  v.excluded = j.at("excluded").get<std::vector<Exclusion>>();
  v.notes = j.at("notes").get<std::vector<std::string>>();
}

void to_json(json& j, const ExpectationCheck& v) {
  j = {{"group_i", v.group_i},
       {"group_j", v.group_j},
       {"expected_sign", v.expected_sign},
       {"delta_far", real(v.delta_far)},
       {"observed_sign", v.observed_sign},
       {"holds", v.holds()}};
}
void from_json(const json& j, ExpectationCheck& v) {
  v.group_i = j.at("group_i").get<std::string>();
  v.group_j = j.at("group_j").get<std::string>();
  v.expected_sign = j.at("expected_sign").get<int>();
  v.delta_far = get_real(j, "delta_far");
  v.observed_sign = j.at("observed_sign").get<int>();
}

void to_json(json& j, const OperatingPointAudit& v) {
  j = {{"operating_point", v.operating_point},
       {"individual_rates", v.rates},
       {"group_rates", v.groups},
       {"deltas", v.deltas},
       {"explanations", v.explanations},
       {"expectation_checks", v.expectation_checks},
       {"notes", v.notes}};
  j["kruskal_far"] = v.kruskal_far ? json(*v.kruskal_far) : json(nullptr);
  j["kruskal_frr"] = v.kruskal_frr ? json(*v.kruskal_frr) : json(nullptr);
}
void from_json(const json& j, OperatingPointAudit& v) {
  v.operating_point = j.at("operating_point").get<OperatingPoint>();
  v.rates = j.at("individual_rates").get<IndividualRatesResult>();
  v.groups = j.at("group_rates").get<GroupRatesResult>();
  v.deltas = j.at("deltas").get<std::vector<FairnessDelta>>();
  v.kruskal_far = get_optional<PValueMatrix>(j, "kruskal_far");
  v.kruskal_frr = get_optional<PValueMatrix>(j, "kruskal_frr");
  v.explanations = j.at("explanations").get<std::vector<ExplanatoryReport>>();
  v.expectation_checks = j.at("expectation_checks").get<std::vector<ExpectationCheck>>();
  v.notes = j.at("notes").get<std::vector<std::string>>();
}

void to_json(json& j, const AuditBundle& v) {
  j = {{"tool_version", v.tool_version},
       {"pair_seed", v.pair_seed},
       {"group_by", v.group_by},
       {"counts",
        {{"identities", v.counts.identities},
         {"images", v.counts.images},
         {"genuine_pairs", v.counts.genuine_pairs},
         {"impostor_pairs", v.counts.impostor_pairs}}},
       {"skipped_identities", v.skipped_identities},
       {"unattributed_images", v.unattributed_images},
       {"operating_points", v.operating_points},
       {"notes", v.notes}};
  j["synth_seed"] = optional_json(v.synth_seed);
  j["ground_truth"] = v.ground_truth ? *v.ground_truth : json(nullptr);
}
void from_json(const json& j, AuditBundle& v) {
  v.tool_version = j.at("tool_version").get<std::string>();
  v.synth_seed = get_optional<std::uint64_t>(j, "synth_seed");
  v.pair_seed = j.at("pair_seed").get<std::uint64_t>();
  v.group_by = j.at("group_by").get<std::vector<std::string>>();
  const json& c = j.at("counts");
  v.counts.identities = c.at("identities").get<std::size_t>();
  v.counts.images = c.at("images").get<std::size_t>();
  v.counts.genuine_pairs = c.at("genuine_pairs").get<std::size_t>();
  v.counts.impostor_pairs = c.at("impostor_pairs").get<std::size_t>();
  v.skipped_identities = j.at("skipped_identities").get<std::vector<std::string>>();
  v.unattributed_images = j.at("unattributed_images").get<std::vector<std::string>>();
  v.operating_points = j.at("operating_points").get<std::vector<OperatingPointAudit>>();
  v.notes = j.at("notes").get<std::vector<std::string>>();
  if (j.contains("ground_truth") && !j.at("ground_truth").is_null()) {
    v.ground_truth = j.at("ground_truth");
  } else {
    v.ground_truth.reset();
  }
}

AuditBundle bundle_from_json(const json& doc, std::string_view source) {
  try {
    return doc.get<AuditBundle>();
  } catch (const json::exception& e) {
    throw_data("report", fmt::format("{}: not an audit bundle ({})", source, e.what()));
  }
}

}  // namespace fairaudit

namespace fairaudit::stats {

void to_json(nlohmann::json& j, const CorrelationResult& v) {
  j = {{"r", real(v.r)}, {"p_value", real(v.p_value)}, {"n", v.n}};
}
void from_json(const nlohmann::json& j, CorrelationResult& v) {
  v.r = get_real(j, "r");
  v.p_value = get_real(j, "p_value");
  v.n = j.at("n").get<std::size_t>();
}

void to_json(nlohmann::json& j, const RegressionFit& v) {
  j = {{"column_names", v.column_names},
       {"coefficients", reals(v.coefficients)},
       {"std_errors", reals(v.std_errors)},
       {"t_stats", reals(v.t_stats)},
       {"p_values", reals(v.p_values)},
       {"residual_sum_squares", real(v.residual_sum_squares)},
       {"r_squared", real(v.r_squared)},
       {"f_statistic", real(v.f_statistic)},
       {"f_p_value", real(v.f_p_value)},
       {"dof_residual", v.dof_residual}};
}
void from_json(const nlohmann::json& j, RegressionFit& v) {
  v.column_names = j.at("column_names").get<std::vector<std::string>>();
  v.coefficients = get_reals(j, "coefficients");
  v.std_errors = get_reals(j, "std_errors");
  v.t_stats = get_reals(j, "t_stats");
  v.p_values = get_reals(j, "p_values");
  v.residuals.clear();
  v.residual_sum_squares = get_real(j, "residual_sum_squares");
  v.r_squared = get_real(j, "r_squared");
  v.f_statistic = get_real(j, "f_statistic");
  v.f_p_value = get_real(j, "f_p_value");
  v.dof_residual = j.at("dof_residual").get<std::size_t>();
}

}  // namespace fairaudit::stats
