#pragma once

// On-disk cohort format (manifest + per-subject ICN CSV), zero padding,
// seeded synthetic cohorts and model artifact persistence.

#include "szbp/artifact.hpp"
#include "szbp/core.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace szbp::dataio {

namespace fs = std::filesystem;

/// Appends zero columns up to target_len. Throws ConfigError if target_len
/// is shorter than the current length.
IcnMatrix pad_icn(const IcnMatrix& icn, std::size_t target_len);

/// Reads a headerless numeric CSV. With expected_rows set, a different row
/// count is a DataError naming the file.
Matrix read_matrix_csv(const fs::path& path, std::optional<std::size_t> expected_rows = std::nullopt);
void write_matrix_csv(const fs::path& path, const Matrix& m);

/// Manifest header `subject_id,label,icn_path`; icn paths resolve against the
/// manifest directory. Subjects keep manifest order and are padded to the
/// cohort maximum. Without expected_channels every file must match the first.
Dataset load_dataset(const fs::path& manifest, double fs,
                     std::optional<std::size_t> expected_channels = kIcnChannels);

/// Writes `manifest.csv` plus `icn/<subject_id>.csv` (unpadded) under dir.
/// Returns the manifest path.
fs::path write_dataset(const Dataset& ds, const fs::path& dir);

struct SynthConfig {
    std::size_t n_subjects = 160;
    std::size_t length = 234;
    double fs = 2.0;
    double class_balance = 0.5;
    double snr_db = 6.0;
    std::uint64_t seed = 0;
    double sz_tone_hz = 0.50;
    double bp_tone_hz = 0.15;
    std::vector<std::size_t> sz_coupled_channels{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<std::size_t> bp_coupled_channels{10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
    /// Weight of the shared latent source on the coupled channels.
    double coupling = 1.0;
};

void validate(const SynthConfig& cfg);

/// Per channel: unit-variance band-limited noise. On the subject's class
/// channel set: plus coupling * a shared latent source and a tone with
/// power 10^(snr_db/10) relative to the noise, one random phase per subject.
Dataset generate_synthetic(const SynthConfig& cfg);

/// One row per subject, fnc_length columns, no header.
void write_fnc_cache(const fs::path& path, const Matrix& fnc);
Matrix read_fnc_cache(const fs::path& path, std::size_t columns);

// ---------------------------------------------------------------- artifacts

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

nlohmann::json to_json(const ModelArtifact& m);
/// Checks version and checksum; throws DataError on any mismatch.
ModelArtifact artifact_from_json(const nlohmann::json& j);

void save_model(const ModelArtifact& model, const fs::path& path);
ModelArtifact load_model(const fs::path& path);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace szbp::dataio
