#pragma once

#include "pathdepth/dataset.hpp"
#include "pathdepth/fcn.hpp"
#include "pathdepth/fspl.hpp"
#include "pathdepth/gbt.hpp"
#include "pathdepth/logreg.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pathdepth {

enum class ModelKind { LogReg, Gbt, Fcn };

std::string_view model_kind_name(ModelKind kind);
std::optional<ModelKind> model_kind_from_name(std::string_view name);

using TrainedModel = std::variant<LogRegModel, GbtModel, FcnModel>;

ModelKind model_kind(const TrainedModel& model);
FeatureConfig model_config(const TrainedModel& model);

double predict(const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& features);
double predict(const TrainedModel& model, const FeatureRow& row);
Eigen::VectorXd predict(const TrainedModel& model, const std::vector<FeatureRow>& rows);

/// Everything needed to fit any of the three families.
struct ModelSpec {
  ModelKind kind = ModelKind::LogReg;
  FeatureConfig config = FeatureConfig::Three;
  double depth_floor = 1.0;
  GbtParams gbt;
  TrainSpec fcn;
};

/// Fits the requested family with the given seed (ignored by log-reg).
TrainedModel fit_model(const std::vector<FeatureRow>& rows, const ModelSpec& spec, std::uint64_t seed);

inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const TrainedModel& model);
TrainedModel parse_model(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace pathdepth
