#pragma once

#include <string>

#include "galev/attention.hpp"
#include "galev/calibration.hpp"
#include "galev/captions.hpp"
#include "galev/evaluation.hpp"
#include "galev/linear_model.hpp"
#include "galev/segmentation.hpp"

namespace galev {

// JSON serialization. The *_to_json functions return pretty-printed JSON
// text; loaders accept files written by the savers and tolerate extra keys.

std::string linear_model_to_json(const LinearModel& model);
LinearModel linear_model_from_json(const std::string& text);
void save_linear_model(const LinearModel& model, const std::string& path);
LinearModel load_linear_model(const std::string& path);

std::string attention_model_to_json(const AttentionModel& model);
AttentionModel attention_model_from_json(const std::string& text);
void save_attention_model(const AttentionModel& model, const std::string& path);
AttentionModel load_attention_model(const std::string& path);

std::string calibration_result_to_json(const CalibrationResult& result);
CalibrationResult calibration_result_from_json(const std::string& text);
void save_calibration_result(const CalibrationResult& result, const std::string& path);
CalibrationResult load_calibration_result(const std::string& path);

std::string eval_report_to_json(const EvalReport& report);
EvalReport eval_report_from_json(const std::string& text);

// Boundary artifact: {"ends": [...], "space": ..., "metric": ..., "threshold": ...}
// with 1-based album end indices.
std::string boundaries_to_json(const Boundaries& bounds, const SegmentationConfig& config);

// One word per line, rank order.
void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

// JSON lines {"photo_id": ..., "active": [...]}.
void save_encoded_captions(const std::vector<std::string>& photo_ids,
                           const std::vector<SparseCaptionVector>& encoded,
                           const std::string& path);

std::string metric_kind_name(MetricKind kind);
MetricKind metric_kind_from_name(const std::string& name);
std::string space_name(SegmentationSpace space);
SegmentationSpace space_from_name(const std::string& name);

} // namespace galev
