#pragma once

// Experiment orchestration: feature construction for every feature set,
// training (CNN with early stopping or classical grid search), holdout
// scoring, reports, persisted artifacts and scoring of new cohorts.

#include "szbp/artifact.hpp"
#include "szbp/classical.hpp"
#include "szbp/dataio.hpp"
#include "szbp/dsp.hpp"
#include "szbp/neural.hpp"
#include "szbp/timefreq.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace szbp::experiment {

enum class FeatureSet { RawIcn, IcnLow, IcnMid, IcnHigh, Spectrogram, Scalogram, FncAll, FncTop20 };

inline constexpr FeatureSet kAllFeatureSets[] = {FeatureSet::RawIcn,      FeatureSet::IcnLow,    FeatureSet::IcnMid,
                                                 FeatureSet::IcnHigh,     FeatureSet::Spectrogram,
                                                 FeatureSet::Scalogram,   FeatureSet::FncAll,    FeatureSet::FncTop20};

std::string to_string(FeatureSet f);
FeatureSet parse_feature_set(const std::string& s);

inline const std::string kCnn1d = "CNN1D";
inline const std::string kCnn3d = "CNN3D";

/// Models usable with a feature set: CNN1D for ICN matrices, CNN3D for
/// tensors, the classical algorithms for FNC vectors.
std::vector<std::string> compatible_models(FeatureSet f);

struct ExperimentConfig {
    FeatureSet feature_set = FeatureSet::RawIcn;
    std::string model = kCnn1d;
    std::uint64_t seed = 0;

    // data: a manifest, or a synthetic cohort when no manifest is given
    std::optional<std::string> manifest;
    double fs = 2.0;
    dataio::SynthConfig synthetic;
    std::vector<std::string> eval_manifests;  ///< extra labeled evaluation sets
    double holdout_fraction = 0.2;

    std::array<dsp::BandSpec, 3> bands{dsp::kLowBand, dsp::kMidBand, dsp::kHighBand};
    timefreq::StftConfig stft;
    timefreq::CwtConfig cwt;
    bool downsample_scalogram = false;

    std::size_t top_k = 20;
    std::size_t cv_folds = 5;
    std::vector<classical::Hyperparameters> grid;  ///< empty = default grid

    neural::TrainConfig train;

    std::string output_dir = "out";
};

/// Throws ConfigError on incompatible or invalid settings.
void validate(const ExperimentConfig& cfg);

/// Every field, with sorted keys. output_dir is included only when asked.
nlohmann::json to_json(const ExperimentConfig& cfg, bool with_output_dir = true);
/// Overlays j onto base; unknown keys are a ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
/// FNV-1a over the canonical serialization, excluding output_dir.
std::string fingerprint(const ExperimentConfig& cfg);

struct ReportRow {
    std::string feature_set;
    std::string model;
    std::string split;
    double auc = 0.0;
    std::size_t n = 0;
    double runtime_s = 0.0;
    std::string fingerprint;
};

struct Report {
    std::vector<ReportRow> rows;

    std::string to_csv(bool with_runtime = true) const;
    nlohmann::json to_json() const;
};

struct ExperimentResult {
    Report report;
    ModelArtifact artifact;
    std::optional<neural::TrainHistory> history;
    std::optional<classical::GridSearchResult> grid;
    std::vector<std::size_t> holdout;  ///< subject indices scored for the holdout row
    std::vector<double> holdout_scores;
};

/// Cohort named by the config: the manifest or the synthetic generator.
Dataset load_cohort(const ExperimentConfig& cfg);

/// Runs on an already loaded cohort; writes nothing.
ExperimentResult run_on(const ExperimentConfig& cfg, const Dataset& ds);

/// Loads the cohort, runs, and writes report.csv, report.json, model.json,
/// config.json and history.csv or grid.csv under output_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Scores every subject with a persisted model, in dataset order. Throws
/// FeatureMismatchError if the data does not fit the model's feature space.
std::vector<double> score(const ModelArtifact& model, const Dataset& ds);

/// Loads a manifest with the channel count and sampling rate of the model.
Dataset load_for_model(const ModelArtifact& model, const std::filesystem::path& manifest);

/// Writes `subject_id,score` rows; returns the scores.
std::vector<double> predict(const std::filesystem::path& model_path, const std::filesystem::path& manifest,
                            const std::filesystem::path& out_path);

/// Every feature set with every compatible model on one cohort, one run
/// directory per combination under base.output_dir.
Report run_grid(const ExperimentConfig& base);

// ---------------------------------------------------------------- features

/// Per-subject network inputs before standardization: [C, L] for ICN sets,
/// [1, F, T, C] for tensor sets.
std::vector<neural::Tensor> cnn_inputs(const Dataset& ds, const ExperimentConfig& cfg);

/// Subjects x fnc_length matrix; stored FNC vectors are used when present.
Matrix fnc_matrix(const Dataset& ds);

}  // namespace szbp::experiment
