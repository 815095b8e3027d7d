#pragma once

#include <json.hpp>

#include "fairaudit/calibration.hpp"
#include "fairaudit/explain.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/pipeline.hpp"
#include "fairaudit/regression.hpp"
#include "fairaudit/stats.hpp"

// JSON forms of the result types. Non-finite reals are written as null and
// read back as NaN.

namespace fairaudit {

void to_json(nlohmann::json& j, const ThresholdPolicy& v);
void from_json(const nlohmann::json& j, ThresholdPolicy& v);
void to_json(nlohmann::json& j, const OperatingPoint& v);
void from_json(const nlohmann::json& j, OperatingPoint& v);
void to_json(nlohmann::json& j, const IndividualRates& v);
void from_json(const nlohmann::json& j, IndividualRates& v);
void to_json(nlohmann::json& j, const Exclusion& v);
void from_json(const nlohmann::json& j, Exclusion& v);
void to_json(nlohmann::json& j, const IndividualRatesResult& v);
void from_json(const nlohmann::json& j, IndividualRatesResult& v);
void to_json(nlohmann::json& j, const GroupKey& v);
void from_json(const nlohmann::json& j, GroupKey& v);
void to_json(nlohmann::json& j, const GroupSpec& v);
void from_json(const nlohmann::json& j, GroupSpec& v);
void to_json(nlohmann::json& j, const GroupRates& v);
void from_json(const nlohmann::json& j, GroupRates& v);
void to_json(nlohmann::json& j, const GroupRatesResult& v);
void from_json(const nlohmann::json& j, GroupRatesResult& v);
void to_json(nlohmann::json& j, const FairnessDelta& v);
void from_json(const nlohmann::json& j, FairnessDelta& v);
void to_json(nlohmann::json& j, const PValueMatrix& v);
void from_json(const nlohmann::json& j, PValueMatrix& v);
void to_json(nlohmann::json& j, const ColumnCorrelation& v);
void from_json(const nlohmann::json& j, ColumnCorrelation& v);
void to_json(nlohmann::json& j, const RegressionOutcome& v);
void from_json(const nlohmann::json& j, RegressionOutcome& v);
void to_json(nlohmann::json& j, const ExplanatoryReport& v);
void from_json(const nlohmann::json& j, ExplanatoryReport& v);
void to_json(nlohmann::json& j, const ExpectationCheck& v);
void from_json(const nlohmann::json& j, ExpectationCheck& v);
void to_json(nlohmann::json& j, const OperatingPointAudit& v);
void from_json(const nlohmann::json& j, OperatingPointAudit& v);
void to_json(nlohmann::json& j, const AuditBundle& v);
void from_json(const nlohmann::json& j, AuditBundle& v);

/// Data error naming `source` when the document does not match.
AuditBundle bundle_from_json(const nlohmann::json& doc, std::string_view source);

}  // namespace fairaudit

namespace fairaudit::stats {

void to_json(nlohmann::json& j, const CorrelationResult& v);
void from_json(const nlohmann::json& j, CorrelationResult& v);
void to_json(nlohmann::json& j, const RegressionFit& v);
void from_json(const nlohmann::json& j, RegressionFit& v);

}  // namespace fairaudit::stats
