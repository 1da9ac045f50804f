#include "szbp/dataio.hpp"

#include "szbp/dsp.hpp"
#include "szbp/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_set>

namespace szbp {

const NamedArray& find_array(const std::vector<NamedArray>& arrays, const std::string& name) {
    for (const auto& a : arrays)
        if (a.name == name) return a;
    throw DataError("model artifact has no parameter array '" + name + "'");
}

namespace dataio {

namespace {

std::string where(const fs::path& path, std::size_t line) { return path.string() + ":" + std::to_string(line); }

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return in;
}

void append_number(std::string& out, double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, r.ptr);
}

double parse_number(std::string_view cell, const fs::path& path, std::size_t line, std::size_t col) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (r.ec != std::errc() || r.ptr != cell.data() + cell.size())
        throw DataError(where(path, line) + ": non-numeric cell '" + std::string(cell) + "' in column " +
                        std::to_string(col + 1));
    if (!std::isfinite(v))
        throw DataError(where(path, line) + ": non-finite value in column " + std::to_string(col + 1));
    return v;
}

std::vector<double> unit_variance(std::vector<double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(x.size()));
    for (double& v : x) v = (v - mean) / sd;
    return x;
}

}  // namespace

// ---------------------------------------------------------------- padding and CSV

IcnMatrix pad_icn(const IcnMatrix& icn, std::size_t target_len) {
    if (target_len < icn.length())
        throw ConfigError("cannot pad length " + std::to_string(icn.length()) + " down to " +
                          std::to_string(target_len));
    if (target_len == icn.length()) return icn;
    IcnMatrix out;
    out.fs = icn.fs;
    out.original_length = icn.original_length;
    out.data = Matrix(icn.channels(), target_len, 0.0);
    for (std::size_t c = 0; c < icn.channels(); ++c) std::ranges::copy(icn.data.row(c), out.data.row(c).begin());
    return out;
}

Matrix read_matrix_csv(const fs::path& path, std::optional<std::size_t> expected_rows) {
    auto in = open_in(path);
    std::vector<double> values;
    std::size_t rows = 0, cols = 0, line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_commas(line);
        if (rows == 0)
            cols = cells.size();
        else if (cells.size() != cols)
            throw DataError(where(path, line_no) + ": expected " + std::to_string(cols) + " values, found " +
                            std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) values.push_back(parse_number(cells[c], path, line_no, c));
        ++rows;
    }
    if (expected_rows && rows != *expected_rows)
        throw DataError(path.string() + ": expected " + std::to_string(*expected_rows) + " rows, found " +
                        std::to_string(rows));
    if (rows == 0) throw DataError(path.string() + ": empty matrix file");
    Matrix m(rows, cols);
    m.values() = std::move(values);
    return m;
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
    std::string out;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) out.push_back(',');
            append_number(out, m(r, c));
        }
        out.push_back('\n');
    }
    write_text(path, out);
}

// ---------------------------------------------------------------- manifest

Dataset load_dataset(const fs::path& manifest, double fs, std::optional<std::size_t> expected_channels) {
    if (!(fs > 0.0)) throw ConfigError("sampling rate must be positive");
    auto in = open_in(manifest);
    const fs::path base = manifest.parent_path();
    std::string line;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line) != "subject_id,label,icn_path")
        throw DataError(where(manifest, line_no) + ": expected header 'subject_id,label,icn_path'");

    Dataset ds;
    ds.fs = fs;
    std::unordered_set<std::string> seen;
    std::optional<std::size_t> channels = expected_channels;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_commas(line);
        if (cells.size() != 3)
            throw DataError(where(manifest, line_no) + ": expected 3 fields, found " + std::to_string(cells.size()));
        SubjectRecord rec;
        rec.subject_id = std::string(trim(cells[0]));
        if (rec.subject_id.empty()) throw DataError(where(manifest, line_no) + ": empty subject_id");
        if (!seen.insert(rec.subject_id).second)
            throw DataError(where(manifest, line_no) + ": duplicate subject_id '" + rec.subject_id + "'");
        try {
            rec.label = parse_label(std::string(trim(cells[1])));
        } catch (const DataError& e) {
            throw DataError(where(manifest, line_no) + ": " + e.what());
        }
        fs::path icn_path(std::string(trim(cells[2])));
        if (icn_path.is_relative()) icn_path = base / icn_path;
        if (!fs::exists(icn_path))
            throw DataError(where(manifest, line_no) + ": missing ICN file '" + icn_path.string() + "'");
        Matrix m = read_matrix_csv(icn_path, channels);
        if (!channels) channels = m.rows();
        try {
            rec.icn = make_icn(std::move(m), fs);
        } catch (const DataError& e) {
            throw DataError(icn_path.string() + ": " + e.what());
        }
        ds.max_length = std::max(ds.max_length, rec.icn.length());
        ds.subjects.push_back(std::move(rec));
    }
    if (ds.subjects.empty()) throw DataError(manifest.string() + ": manifest lists no subjects");
    for (auto& s : ds.subjects) s.icn = pad_icn(s.icn, ds.max_length);
    return ds;
}

fs::path write_dataset(const Dataset& ds, const fs::path& dir) {
    fs::create_directories(dir / "icn");
    std::string manifest = "subject_id,label,icn_path\n";
    for (const auto& s : ds.subjects) {
        const std::string rel = "icn/" + s.subject_id + ".csv";
        const std::size_t n = s.icn.original_length;
        Matrix m(s.icn.channels(), n);
        for (std::size_t c = 0; c < m.rows(); ++c)
            std::copy_n(s.icn.data.row(c).begin(), n, m.row(c).begin());
        write_matrix_csv(dir / rel, m);
        manifest += s.subject_id + "," + (s.label ? to_string(*s.label) : std::string()) + "," + rel + "\n";
    }
    write_text(dir / "manifest.csv", manifest);
    return dir / "manifest.csv";
}

// ---------------------------------------------------------------- synthetic cohort

void validate(const SynthConfig& c) {
    if (c.n_subjects < 2) throw ConfigError("synthetic cohort needs at least 2 subjects");
    if (c.length < 16) throw ConfigError("synthetic length must be >= 16 samples");
    if (!(c.fs > 0.0)) throw ConfigError("sampling rate must be positive");
    if (!(c.class_balance > 0.0 && c.class_balance < 1.0)) throw ConfigError("class_balance must lie in (0, 1)");
    if (!std::isfinite(c.snr_db)) throw ConfigError("snr_db must be finite");
    if (!(c.coupling >= 0.0) || !std::isfinite(c.coupling)) throw ConfigError("coupling must be >= 0");
    for (double f : {c.sz_tone_hz, c.bp_tone_hz})
        if (!(f > 0.0 && f < c.fs / 2)) throw ConfigError("tone frequencies must lie in (0, fs/2)");
    for (const auto* set : {&c.sz_coupled_channels, &c.bp_coupled_channels}) {
        if (set->empty()) throw ConfigError("coupled channel sets must be non-empty");
        for (auto ch : *set)
            if (ch >= kIcnChannels) throw ConfigError("coupled channel index " + std::to_string(ch) + " out of range");
    }
}

Dataset generate_synthetic(const SynthConfig& cfg) {
    validate(cfg);
    const std::size_t n_sz = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::floor(static_cast<double>(cfg.n_subjects) * cfg.class_balance + 0.5)), 1,
        cfg.n_subjects - 1);
    std::vector<Label> labels(cfg.n_subjects, Label::BP);
    std::fill_n(labels.begin(), n_sz, Label::SZ);
    Rng(derive_seed(cfg.seed, 0)).shuffle(labels);

    const double nyq = cfg.fs / 2;
    const auto noise_filter = dsp::design_butterworth_bandpass({0.005 * nyq, 0.95 * nyq, 2}, cfg.fs);
    const double amp = std::sqrt(2.0 * std::pow(10.0, cfg.snr_db / 10.0));
    const std::size_t L = cfg.length;

    auto noise = [&](Rng& rng) {
        std::vector<double> w(L);
        for (double& v : w) v = rng.normal();
        return unit_variance(dsp::apply_zero_phase(noise_filter, w));
    };

    Dataset ds;
    ds.fs = cfg.fs;
    ds.max_length = L;
    const int width = static_cast<int>(std::to_string(cfg.n_subjects - 1).size());
    for (std::size_t i = 0; i < cfg.n_subjects; ++i) {
        Rng rng(derive_seed(cfg.seed, 1 + i));
        const bool sz = labels[i] == Label::SZ;
        const auto& coupled = sz ? cfg.sz_coupled_channels : cfg.bp_coupled_channels;
        const double tone = sz ? cfg.sz_tone_hz : cfg.bp_tone_hz;

        Matrix m(kIcnChannels, L);
        for (std::size_t c = 0; c < kIcnChannels; ++c) std::ranges::copy(noise(rng), m.row(c).begin());
        const auto latent = noise(rng);
        const double phase = 2.0 * std::numbers::pi * rng.uniform();
        const std::set<std::size_t> chans(coupled.begin(), coupled.end());
        for (auto c : chans) {
            auto row = m.row(c);
            for (std::size_t t = 0; t < L; ++t)
                row[t] += cfg.coupling * latent[t] +
                          amp * std::sin(2.0 * std::numbers::pi * tone * static_cast<double>(t) / cfg.fs + phase);
        }

        std::string id = std::to_string(i);
        id.insert(0, static_cast<std::size_t>(width) - id.size(), '0');
        ds.subjects.push_back({"sub" + id, labels[i], make_icn(std::move(m), cfg.fs), std::nullopt});
    }
    return ds;
}

// ---------------------------------------------------------------- FNC cache

void write_fnc_cache(const fs::path& path, const Matrix& fnc) { write_matrix_csv(path, fnc); }

Matrix read_fnc_cache(const fs::path& path, std::size_t columns) {
    Matrix m = read_matrix_csv(path);
    if (m.cols() != columns)
        throw DataError(path.string() + ": expected " + std::to_string(columns) + " FNC columns, found " +
                        std::to_string(m.cols()));
    return m;
}

// ---------------------------------------------------------------- artifacts

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

namespace {

nlohmann::json artifact_body(const ModelArtifact& m) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& a : m.parameters) params.push_back({{"name", a.name}, {"shape", a.shape}, {"data", a.data}});
    return {{"format_version", m.format_version},
            {"algorithm", m.algorithm},
            {"hyperparameters", m.hyperparameters},
            {"feature_descriptor", m.feature_descriptor},
            {"parameters", params}};
}

}  // namespace

nlohmann::json to_json(const ModelArtifact& m) {
    for (const auto& a : m.parameters)
        for (double v : a.data)
            if (!std::isfinite(v)) throw NumericError("parameter array '" + a.name + "' holds a non-finite value");
    auto j = artifact_body(m);
    j["checksum"] = "fnv1a64:" + hex64(fnv1a64(j.dump()));
    return j;
}

ModelArtifact artifact_from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object()) throw DataError("model artifact is not a JSON object");
        const int version = j.at("format_version").get<int>();
        if (version != ModelArtifact::kFormatVersion)
            throw DataError("unsupported model format_version " + std::to_string(version) + " (expected " +
                            std::to_string(ModelArtifact::kFormatVersion) + ")");
        ModelArtifact m;
        m.format_version = version;
        m.algorithm = j.at("algorithm").get<std::string>();
        m.hyperparameters = j.at("hyperparameters");
        m.feature_descriptor = j.at("feature_descriptor");
        for (const auto& p : j.at("parameters")) {
            NamedArray a{p.at("name").get<std::string>(), p.at("shape").get<std::vector<std::size_t>>(),
                         p.at("data").get<std::vector<double>>()};
            std::size_t vol = 1;
            for (auto d : a.shape) vol *= d;
            if (vol != a.data.size()) throw DataError("parameter array '" + a.name + "' does not match its shape");
            m.parameters.push_back(std::move(a));
        }
        const std::string expected = "fnv1a64:" + hex64(fnv1a64(artifact_body(m).dump()));
        if (j.at("checksum").get<std::string>() != expected) throw DataError("model artifact checksum mismatch");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model artifact: ") + e.what());
    }
}

void save_model(const ModelArtifact& model, const fs::path& path) { write_text(path, to_json(model).dump(1) + "\n"); }

ModelArtifact load_model(const fs::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": malformed model artifact: " + e.what());
    }
    try {
        return artifact_from_json(j);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
    auto in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace dataio
}  // namespace szbp
