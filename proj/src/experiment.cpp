#include "szbp/experiment.hpp"

#include "szbp/eval.hpp"
#include "szbp/fnc.hpp"
#include "szbp/rng.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>

namespace szbp::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(FeatureSet f) {
    switch (f) {
        case FeatureSet::RawIcn: return "raw_icn";
        case FeatureSet::IcnLow: return "icn_low";
        case FeatureSet::IcnMid: return "icn_mid";
        case FeatureSet::IcnHigh: return "icn_high";
        case FeatureSet::Spectrogram: return "spectrogram";
        case FeatureSet::Scalogram: return "scalogram";
        case FeatureSet::FncAll: return "fnc_all";
        case FeatureSet::FncTop20: return "fnc_top20";
    }
    return "?";
}

FeatureSet parse_feature_set(const std::string& s) {
    for (auto f : kAllFeatureSets)
        if (to_string(f) == s) return f;
    throw ConfigError("unknown feature set '" + s + "'");
}

namespace {

bool is_icn_set(FeatureSet f) {
    return f == FeatureSet::RawIcn || f == FeatureSet::IcnLow || f == FeatureSet::IcnMid || f == FeatureSet::IcnHigh;
}
bool is_tensor_set(FeatureSet f) { return f == FeatureSet::Spectrogram || f == FeatureSet::Scalogram; }
bool is_cnn(const std::string& model) { return model == kCnn1d || model == kCnn3d; }

std::string number(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

double data_fs(const ExperimentConfig& cfg) { return cfg.manifest ? cfg.fs : cfg.synthetic.fs; }

// Recursive overlay; objects must only carry keys the base already has.
void overlay(json& base, const json& patch, const std::string& path) {
    if (!base.is_object() || !patch.is_object()) {
        base = patch;
        return;
    }
    for (const auto& [key, value] : patch.items()) {
        const std::string p = path.empty() ? key : path + "." + key;
        if (!base.contains(key)) throw ConfigError("unknown config key '" + p + "'");
        overlay(base[key], value, p);
    }
}

json band_json(const dsp::BandSpec& b) { return {{"f_lo", b.f_lo}, {"f_hi", b.f_hi}, {"order", b.order}}; }

json train_json(const neural::TrainConfig& t) {
    return {{"lr", t.lr},         {"beta1", t.beta1},           {"beta2", t.beta2},
            {"eps", t.eps},       {"epochs", t.epochs},         {"batch_size", t.batch_size},
            {"patience", t.patience}, {"val_fraction", t.val_fraction}};
}

json synth_json(const dataio::SynthConfig& s) {
    return {{"n_subjects", s.n_subjects},
            {"length", s.length},
            {"fs", s.fs},
            {"class_balance", s.class_balance},
            {"snr_db", s.snr_db},
            {"seed", s.seed},
            {"sz_tone_hz", s.sz_tone_hz},
            {"bp_tone_hz", s.bp_tone_hz},
            {"sz_coupled_channels", s.sz_coupled_channels},
            {"bp_coupled_channels", s.bp_coupled_channels},
            {"coupling", s.coupling}};
}

json hp_json(const classical::Hyperparameters& hp) {
    json j = json::object();
    for (const auto& [k, v] : hp) j[k] = v;
    return j;
}

classical::Hyperparameters hp_from_json(const json& j) {
    classical::Hyperparameters hp;
    for (const auto& [k, v] : j.items()) hp[k] = v.get<double>();
    return hp;
}

std::size_t feature_index(FeatureSet f) {
    return f == FeatureSet::IcnLow ? 0 : f == FeatureSet::IcnMid ? 1 : 2;
}

neural::NetworkConfig network_for(const ExperimentConfig& cfg, const neural::Shape& input) {
    if (cfg.model == kCnn1d) return neural::default_cnn1d(input[0], input[1]);
    return neural::default_cnn3d(input[1], input[2], input[3]);
}

struct Standardizer {
    double mean = 0.0;
    double sd = 1.0;
};

Standardizer fit_standardizer(const std::vector<neural::Tensor>& inputs, std::span<const std::size_t> rows) {
    double sum = 0.0, count = 0.0;
    for (auto r : rows) {
        for (double v : inputs[r].data) sum += v;
        count += static_cast<double>(inputs[r].size());
    }
    Standardizer s;
    s.mean = sum / count;
    double ss = 0.0;
    for (auto r : rows)
        for (double v : inputs[r].data) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / count);
    if (!(s.sd > 0.0) || !std::isfinite(s.sd)) throw NumericError("network inputs have zero variance");
    return s;
}

void standardize(std::vector<neural::Tensor>& inputs, const Standardizer& s) {
    for (auto& t : inputs)
        for (double& v : t.data) v = (v - s.mean) / s.sd;
}

std::vector<int> pick(std::span<const int> y, std::span<const std::size_t> idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(y[i]);
    return out;
}

// Pads to the model length or rejects data that does not fit the model.
Dataset conform(const Dataset& ds, const json& desc) {
    const auto channels = desc.at("channels").get<std::size_t>();
    const auto length = desc.at("length").get<std::size_t>();
    const auto fs = desc.at("fs").get<double>();
    if (ds.subjects.empty()) throw DataError("no subjects to score");
    for (const auto& s : ds.subjects)
        if (s.icn.channels() != channels)
            throw FeatureMismatchError("subject '" + s.subject_id + "' has " + std::to_string(s.icn.channels()) +
                                       " channels, model expects " + std::to_string(channels));
    if (ds.fs != fs)
        throw FeatureMismatchError("data sampling rate " + number(ds.fs) + " Hz differs from the model's " +
                                   number(fs) + " Hz");
    if (ds.max_length > length)
        throw FeatureMismatchError("data length " + std::to_string(ds.max_length) + " exceeds model length " +
                                   std::to_string(length));
    Dataset out = ds;
    out.max_length = length;
    for (auto& s : out.subjects) s.icn = dataio::pad_icn(s.icn, length);
    return out;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res) {
    const fs::path dir = cfg.output_dir;
    dataio::save_model(res.artifact, dir / "model.json");
    dataio::write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");
    dataio::write_text(dir / "report.csv", res.report.to_csv());
    json rj = res.report.to_json();
    rj["model_path"] = "model.json";
    rj["config_path"] = "config.json";
    dataio::write_text(dir / "report.json", rj.dump(2) + "\n");
    if (res.history) {
        std::string csv = "epoch,train_loss,val_loss,val_auc\n";
        for (const auto& e : res.history->epochs)
            csv += std::to_string(e.epoch) + "," + number(e.train_loss) + "," + number(e.val_loss) + "," +
                   number(e.val_auc) + "\n";
        dataio::write_text(dir / "history.csv", csv);
    }
    if (res.grid) {
        std::string csv = "point,hyperparameters,fold,auc\n";
        for (std::size_t p = 0; p < res.grid->points.size(); ++p) {
            const auto& pt = res.grid->points[p];
            std::string hp;
            for (const auto& [k, v] : pt.hp) hp += (hp.empty() ? "" : ";") + k + "=" + number(v);
            for (std::size_t f = 0; f < pt.fold_auc.size(); ++f)
                csv += std::to_string(p) + "," + hp + "," + std::to_string(f) + "," + number(pt.fold_auc[f]) + "\n";
            csv += std::to_string(p) + "," + hp + ",mean," + number(pt.mean_auc) + "\n";
        }
        dataio::write_text(dir / "grid.csv", csv);
    }
}

}  // namespace

std::vector<std::string> compatible_models(FeatureSet f) {
    if (is_icn_set(f)) return {kCnn1d};
    if (is_tensor_set(f)) return {kCnn3d};
    std::vector<std::string> out;
    for (auto a : classical::kAllAlgorithms) out.push_back(classical::to_string(a));
    return out;
}

// ---------------------------------------------------------------- config

void validate(const ExperimentConfig& cfg) {
    const auto models = compatible_models(cfg.feature_set);
    if (std::find(models.begin(), models.end(), cfg.model) == models.end())
        throw ConfigError("model '" + cfg.model + "' is not compatible with feature set '" +
                          to_string(cfg.feature_set) + "'");
    if (!(cfg.holdout_fraction > 0.0 && cfg.holdout_fraction < 1.0))
        throw ConfigError("holdout_fraction must lie in (0, 1)");
    if (!(cfg.fs > 0.0)) throw ConfigError("sampling rate must be positive");
    if (!cfg.manifest) dataio::validate(cfg.synthetic);
    for (const auto& b : cfg.bands) dsp::validate_band(b, data_fs(cfg));
    if (cfg.stft.hop < 1 || cfg.stft.hop > cfg.stft.window_len || cfg.stft.window_len < 1)
        throw ConfigError("STFT needs 1 <= hop <= window_len");
    if (!(cfg.stft.tukey_alpha >= 0.0 && cfg.stft.tukey_alpha <= 1.0))
        throw ConfigError("tukey_alpha must lie in [0, 1]");
    if (cfg.cwt.scales.empty()) throw ConfigError("CWT needs at least one scale");
    for (std::size_t i = 0; i < cfg.cwt.scales.size(); ++i)
        if (!(cfg.cwt.scales[i] > 0.0) || (i && !(cfg.cwt.scales[i] > cfg.cwt.scales[i - 1])))
            throw ConfigError("CWT scales must be positive and strictly increasing");
    if (cfg.top_k < 1) throw ConfigError("top_k must be >= 1");
    if (cfg.cv_folds < 2) throw ConfigError("cv_folds must be >= 2");
    neural::validate(cfg.train);
    if (!is_cnn(cfg.model)) {
        const auto alg = classical::parse_algorithm(cfg.model);
        for (const auto& hp : cfg.grid) classical::resolve({alg, hp});
    }
}

json to_json(const ExperimentConfig& cfg, bool with_output_dir) {
    json grid = json::array();
    for (const auto& hp : cfg.grid) grid.push_back(hp_json(hp));
    json bands = json::array();
    for (const auto& b : cfg.bands) bands.push_back(band_json(b));
    json j{{"feature_set", to_string(cfg.feature_set)},
           {"model", cfg.model},
           {"seed", cfg.seed},
           {"data",
            {{"manifest", cfg.manifest ? json(*cfg.manifest) : json(nullptr)},
             {"fs", cfg.fs},
             {"eval_manifests", cfg.eval_manifests},
             {"holdout_fraction", cfg.holdout_fraction}}},
           {"synthetic", synth_json(cfg.synthetic)},
           {"bands", bands},
           {"stft", {{"window_len", cfg.stft.window_len}, {"tukey_alpha", cfg.stft.tukey_alpha}, {"hop", cfg.stft.hop}}},
           {"cwt", {{"scales", cfg.cwt.scales}, {"omega0", cfg.cwt.omega0}}},
           {"downsample_scalogram", cfg.downsample_scalogram},
           {"fnc", {{"top_k", cfg.top_k}}},
           {"classical", {{"cv_folds", cfg.cv_folds}, {"grid", grid}}},
           {"train", train_json(cfg.train)}};
    if (with_output_dir) j["output_dir"] = cfg.output_dir;
    return j;
}

ExperimentConfig config_from_json(const json& patch, ExperimentConfig base) {
    json j = to_json(base);
    if (!patch.is_object()) throw ConfigError("config must be a JSON object");
    overlay(j, patch, "");
    try {
        ExperimentConfig c;
        c.feature_set = parse_feature_set(j.at("feature_set").get<std::string>());
        c.model = j.at("model").get<std::string>();
        c.seed = j.at("seed").get<std::uint64_t>();
        const auto& d = j.at("data");
        if (!d.at("manifest").is_null()) c.manifest = d.at("manifest").get<std::string>();
        c.fs = d.at("fs").get<double>();
        c.eval_manifests = d.at("eval_manifests").get<std::vector<std::string>>();
        c.holdout_fraction = d.at("holdout_fraction").get<double>();

        const auto& s = j.at("synthetic");
        auto& sc = c.synthetic;
        sc.n_subjects = s.at("n_subjects").get<std::size_t>();
        sc.length = s.at("length").get<std::size_t>();
        sc.fs = s.at("fs").get<double>();
        sc.class_balance = s.at("class_balance").get<double>();
        sc.snr_db = s.at("snr_db").get<double>();
        sc.seed = s.at("seed").get<std::uint64_t>();
        sc.sz_tone_hz = s.at("sz_tone_hz").get<double>();
        sc.bp_tone_hz = s.at("bp_tone_hz").get<double>();
        sc.sz_coupled_channels = s.at("sz_coupled_channels").get<std::vector<std::size_t>>();
        sc.bp_coupled_channels = s.at("bp_coupled_channels").get<std::vector<std::size_t>>();
        sc.coupling = s.at("coupling").get<double>();

        const auto& bands = j.at("bands");
        if (!bands.is_array() || bands.size() != 3) throw ConfigError("bands must list exactly 3 entries");
        for (std::size_t i = 0; i < 3; ++i) {
            json b = band_json(base.bands[i]);
            overlay(b, bands[i], "bands." + std::to_string(i));
            c.bands[i] = {b.at("f_lo").get<double>(), b.at("f_hi").get<double>(), b.at("order").get<int>()};
        }
        c.stft.window_len = j.at("stft").at("window_len").get<std::size_t>();
        c.stft.tukey_alpha = j.at("stft").at("tukey_alpha").get<double>();
        c.stft.hop = j.at("stft").at("hop").get<std::size_t>();
        c.cwt.scales = j.at("cwt").at("scales").get<std::vector<double>>();
        c.cwt.omega0 = j.at("cwt").at("omega0").get<double>();
        c.downsample_scalogram = j.at("downsample_scalogram").get<bool>();
        c.top_k = j.at("fnc").at("top_k").get<std::size_t>();
        c.cv_folds = j.at("classical").at("cv_folds").get<std::size_t>();
        for (const auto& hp : j.at("classical").at("grid")) c.grid.push_back(hp_from_json(hp));

        const auto& t = j.at("train");
        c.train.lr = t.at("lr").get<double>();
        c.train.beta1 = t.at("beta1").get<double>();
        c.train.beta2 = t.at("beta2").get<double>();
        c.train.eps = t.at("eps").get<double>();
        c.train.epochs = t.at("epochs").get<std::size_t>();
        c.train.batch_size = t.at("batch_size").get<std::size_t>();
        c.train.patience = t.at("patience").get<std::size_t>();
        c.train.val_fraction = t.at("val_fraction").get<double>();
        c.output_dir = j.at("output_dir").get<std::string>();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
}

std::string fingerprint(const ExperimentConfig& cfg) {
    return dataio::hex64(dataio::fnv1a64(to_json(cfg, false).dump()));
}

// ---------------------------------------------------------------- report

std::string Report::to_csv(bool with_runtime) const {
    std::string out = with_runtime ? "feature_set,model,split,auc,n,runtime_s,config_fingerprint\n"
                                   : "feature_set,model,split,auc,n,config_fingerprint\n";
    for (const auto& r : rows) {
        out += r.feature_set + "," + r.model + "," + r.split + "," + number(r.auc) + "," + std::to_string(r.n) + ",";
        if (with_runtime) out += number(r.runtime_s) + ",";
        out += r.fingerprint + "\n";
    }
    return out;
}

json Report::to_json() const {
    json rows_j = json::array();
    for (const auto& r : rows)
        rows_j.push_back({{"feature_set", r.feature_set},
                          {"model", r.model},
                          {"split", r.split},
                          {"auc", r.auc},
                          {"n", r.n},
                          {"runtime_s", r.runtime_s},
                          {"config_fingerprint", r.fingerprint}});
    return {{"rows", rows_j}};
}

// ---------------------------------------------------------------- features

std::vector<neural::Tensor> cnn_inputs(const Dataset& ds, const ExperimentConfig& cfg) {
    std::vector<neural::Tensor> out;
    out.reserve(ds.size());
    for (const auto& s : ds.subjects) {
        if (is_icn_set(cfg.feature_set)) {
            const Matrix* m = &s.icn.data;
            std::vector<IcnMatrix> banded;
            if (cfg.feature_set != FeatureSet::RawIcn) {
                const auto band = cfg.bands[feature_index(cfg.feature_set)];
                banded = dsp::filter_bank(s.icn, std::span<const dsp::BandSpec>(&band, 1));
                m = &banded[0].data;
            }
            neural::Tensor t({m->rows(), m->cols()});
            t.data = m->values();
            out.push_back(std::move(t));
        } else if (is_tensor_set(cfg.feature_set)) {
            const auto kind = cfg.feature_set == FeatureSet::Spectrogram ? timefreq::TensorKind::Spectrogram
                                                                           : timefreq::TensorKind::Scalogram;
            auto st = timefreq::stack_subject_tensor(s.icn, kind, cfg.stft, cfg.cwt);
            if (kind == timefreq::TensorKind::Scalogram && cfg.downsample_scalogram)
                st.data = timefreq::downsample_time(st.data);
            neural::Tensor t({1, st.data.dim0(), st.data.dim1(), st.data.dim2()});
            t.data = std::move(st.data.values());
            out.push_back(std::move(t));
        } else {
            throw ConfigError("feature set '" + to_string(cfg.feature_set) + "' has no network input");
        }
    }
    return out;
}

Matrix fnc_matrix(const Dataset& ds) {
    if (ds.subjects.empty()) throw DataError("empty dataset");
    const std::size_t d = fnc::fnc_length(ds.subjects[0].icn.channels());
    Matrix X(ds.size(), d);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& s = ds.subjects[i];
        std::vector<double> v;
        try {
            v = s.fnc ? *s.fnc : fnc::compute_fnc(s.icn);
        } catch (const NumericError& e) {
            throw NumericError("subject '" + s.subject_id + "': " + e.what());
        }
        if (v.size() != d)
            throw FeatureMismatchError("subject '" + s.subject_id + "' has an FNC vector of length " +
                                       std::to_string(v.size()) + ", expected " + std::to_string(d));
        std::ranges::copy(v, X.row(i).begin());
    }
    return X;
}

// ---------------------------------------------------------------- running

Dataset load_cohort(const ExperimentConfig& cfg) {
    if (cfg.manifest) return dataio::load_dataset(*cfg.manifest, cfg.fs, kIcnChannels);
    return dataio::generate_synthetic(cfg.synthetic);
}

ExperimentResult run_on(const ExperimentConfig& cfg, const Dataset& ds) {
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const auto y = labels_of(ds);
    const auto split = eval::stratified_split(y, cfg.holdout_fraction, derive_seed(cfg.seed, 100));
    const auto y_train = pick(y, split.train);
    const auto y_hold = pick(y, split.holdout);

    ExperimentResult res;
    res.holdout = split.holdout;
    auto& art = res.artifact;
    art.algorithm = cfg.model;
    art.feature_descriptor = {{"feature_set", to_string(cfg.feature_set)},
                              {"channels", ds.subjects.at(0).icn.channels()},
                              {"length", ds.max_length},
                              {"fs", ds.fs},
                              {"pipeline", to_json(cfg, false)}};

    if (is_cnn(cfg.model)) {
        auto inputs = cnn_inputs(ds, cfg);
        const auto st = fit_standardizer(inputs, split.train);
        standardize(inputs, st);
        const auto net_cfg = network_for(cfg, inputs.at(0).shape);

        const auto inner = eval::stratified_split(y_train, cfg.train.val_fraction, derive_seed(cfg.seed, 101));
        std::vector<std::size_t> fit_idx, val_idx;
        for (auto i : inner.train) fit_idx.push_back(split.train[i]);
        for (auto i : inner.holdout) val_idx.push_back(split.train[i]);
        auto tc = cfg.train;
        tc.seed = derive_seed(cfg.seed, 102);
        auto trained = neural::train_split(net_cfg, inputs, y, fit_idx, val_idx, tc);

        for (auto i : split.holdout) res.holdout_scores.push_back(trained.network.forward(inputs[i]));
        art.hyperparameters = {{"network", neural::to_json(net_cfg)}, {"train", train_json(cfg.train)}};
        art.feature_descriptor["input_shape"] = inputs.at(0).shape;
        art.feature_descriptor["input_mean"] = st.mean;
        art.feature_descriptor["input_sd"] = st.sd;
        art.parameters = trained.network.parameters();
        res.history = std::move(trained.history);
    } else {
        const auto alg = classical::parse_algorithm(cfg.model);
        const Matrix X = fnc_matrix(ds);
        const auto fitted = fnc::minmax_normalize_fit(fnc::make_table(X.select_rows(split.train)));

        std::vector<std::size_t> selected(X.cols());
        for (std::size_t j = 0; j < selected.size(); ++j) selected[j] = j;
        if (cfg.feature_set == FeatureSet::FncTop20) {
            if (cfg.top_k > X.cols()) throw ConfigError("top_k exceeds the number of FNC features");
            selected = fnc::select_top_k(fnc::chi2_scores(fitted.X, y_train), cfg.top_k).selected;
        }
        std::vector<double> lo, hi;
        for (auto j : selected) {
            lo.push_back(fitted.lo[j]);
            hi.push_back(fitted.hi[j]);
        }
        const Matrix X_train = fitted.X.select_cols(selected);
        const auto grid = cfg.grid.empty() ? classical::default_grid(alg) : cfg.grid;
        auto gs = classical::grid_search_cv(alg, grid, X_train, y_train, cfg.cv_folds, derive_seed(cfg.seed, 103));

        const auto X_hold = fnc::minmax_apply(lo, hi, fnc::make_table(X.select_rows(split.holdout).select_cols(selected)));
        res.holdout_scores = classical::predict_scores(gs.model, X_hold.X);
        art.hyperparameters = hp_json(gs.model.spec().hp);
        art.feature_descriptor["features"] = selected;
        art.feature_descriptor["lo"] = lo;
        art.feature_descriptor["hi"] = hi;
        art.parameters = gs.model.parameters();
        res.grid = std::move(gs);
    }

    const std::string fp = fingerprint(cfg);
    const std::string fs_name = to_string(cfg.feature_set);
    res.report.rows.push_back({fs_name, cfg.model, "holdout", eval::auc(res.holdout_scores, y_hold),
                               split.holdout.size(), 0.0, fp});

    double auc_sum = 0.0;
    std::size_t n_sum = 0;
    for (const auto& path : cfg.eval_manifests) {
        const auto eds = load_for_model(art, path);
        const auto scores = score(art, eds);
        const double a = eval::auc(scores, labels_of(eds));
        res.report.rows.push_back({fs_name, cfg.model, fs::path(path).stem().string(), a, eds.size(), 0.0, fp});
        auc_sum += a;
        n_sum += eds.size();
    }
    if (cfg.eval_manifests.size() >= 2)
        res.report.rows.push_back({fs_name, cfg.model, "mean", auc_sum / static_cast<double>(cfg.eval_manifests.size()),
                                   n_sum, 0.0, fp});

    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& r : res.report.rows) r.runtime_s = runtime;
    return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const auto ds = load_cohort(cfg);
    auto res = run_on(cfg, ds);
    write_outputs(cfg, res);
    return res;
}

std::vector<double> score(const ModelArtifact& model, const Dataset& input) {
    json desc = model.feature_descriptor;
    try {
        const Dataset ds = conform(input, desc);
        ExperimentConfig cfg = config_from_json(desc.at("pipeline"));
        if (cfg.model != model.algorithm) throw DataError("artifact algorithm does not match its pipeline");

        if (is_cnn(model.algorithm)) {
            const auto net_cfg = neural::network_config_from_json(model.hyperparameters.at("network"));
            const auto net = neural::Network::from_parameters(net_cfg, model.parameters);
            auto inputs = cnn_inputs(ds, cfg);
            standardize(inputs, {desc.at("input_mean").get<double>(), desc.at("input_sd").get<double>()});
            std::vector<double> out;
            for (const auto& x : inputs) out.push_back(net.forward(x));
            return out;
        }

        const auto alg = classical::parse_algorithm(model.algorithm);
        const auto selected = desc.at("features").get<std::vector<std::size_t>>();
        const auto lo = desc.at("lo").get<std::vector<double>>();
        const auto hi = desc.at("hi").get<std::vector<double>>();
        const Matrix X = fnc_matrix(ds);
        for (auto j : selected)
            if (j >= X.cols()) throw FeatureMismatchError("model feature index out of range for this data");
        const auto table = fnc::minmax_apply(lo, hi, fnc::make_table(X.select_cols(selected)));
        const auto clf = classical::TrainedClassifier::from_parameters(
            classical::resolve({alg, hp_from_json(model.hyperparameters)}), selected.size(), model.parameters);
        return classical::predict_scores(clf, table.X);
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed feature descriptor: ") + e.what());
    }
}

Dataset load_for_model(const ModelArtifact& model, const fs::path& manifest) {
    try {
        return dataio::load_dataset(manifest, model.feature_descriptor.at("fs").get<double>(), std::nullopt);
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed feature descriptor: ") + e.what());
    }
}

std::vector<double> predict(const fs::path& model_path, const fs::path& manifest, const fs::path& out_path) {
    const auto model = dataio::load_model(model_path);
    const auto ds = load_for_model(model, manifest);
    const auto scores = score(model, ds);
    std::string csv = "subject_id,score\n";
    for (std::size_t i = 0; i < ds.size(); ++i) csv += ds.subjects[i].subject_id + "," + number(scores[i]) + "\n";
    dataio::write_text(out_path, csv);
    return scores;
}

Report run_grid(const ExperimentConfig& base) {
    validate(base);
    const auto ds = load_cohort(base);
    Report all;
    for (auto f : kAllFeatureSets)
        for (const auto& m : compatible_models(f)) {
            ExperimentConfig cfg = base;
            cfg.feature_set = f;
            cfg.model = m;
            cfg.grid.clear();
            cfg.output_dir = (fs::path(base.output_dir) / (to_string(f) + "_" + m)).string();
            const auto res = run_on(cfg, ds);
            write_outputs(cfg, res);
            all.rows.insert(all.rows.end(), res.report.rows.begin(), res.report.rows.end());
        }
    dataio::write_text(fs::path(base.output_dir) / "report.csv", all.to_csv());
    dataio::write_text(fs::path(base.output_dir) / "report.json", all.to_json().dump(2) + "\n");
    return all;
}

}  // namespace szbp::experiment
