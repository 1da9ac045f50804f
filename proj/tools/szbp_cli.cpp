// szbp: command-line front end for the SZ/BP differentiation pipeline.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.

#include "szbp/dataio.hpp"
#include "szbp/eval.hpp"
#include "szbp/experiment.hpp"
#include "szbp/fnc.hpp"
#include "szbp/timefreq.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace szbp;

struct CohortFlags {
    std::string config;
    std::optional<std::string> manifest;
    std::optional<double> fs;
    std::optional<std::size_t> n_subjects, length;
    std::optional<double> snr_db, balance, sz_tone, bp_tone, coupling;
    std::optional<std::uint64_t> synth_seed;

    void add(CLI::App* cmd) {
        cmd->add_option("--config", config, "JSON config file");
        cmd->add_option("--manifest", manifest, "Cohort manifest CSV (default: synthetic cohort)");
        cmd->add_option("--fs", fs, "Sampling rate in Hz");
        cmd->add_option("--n-subjects", n_subjects, "Synthetic cohort size");
        cmd->add_option("--length", length, "Synthetic series length");
        cmd->add_option("--snr-db", snr_db, "Synthetic tone SNR in dB");
        cmd->add_option("--balance", balance, "Synthetic SZ fraction");
        cmd->add_option("--sz-tone", sz_tone, "Synthetic SZ tone in Hz");
        cmd->add_option("--bp-tone", bp_tone, "Synthetic BP tone in Hz");
        cmd->add_option("--coupling", coupling, "Synthetic latent coupling weight");
        cmd->add_option("--synth-seed", synth_seed, "Synthetic cohort seed");
    }

    json patch() const {
        json j = json::object();
        if (!config.empty()) {
            try {
                j = json::parse(dataio::read_text(config));
            } catch (const json::exception& e) {
                throw ConfigError(config + ": " + e.what());
            } catch (const DataError& e) {
                throw ConfigError(e.what());
            }
            if (!j.is_object()) throw ConfigError(config + ": config must be a JSON object");
        }
        if (manifest) j["data"]["manifest"] = *manifest;
        if (fs) {
            j["data"]["fs"] = *fs;
            j["synthetic"]["fs"] = *fs;
        }
        auto set = [&](const char* key, const auto& v) {
            if (v) j["synthetic"][key] = *v;
        };
        set("n_subjects", n_subjects);
        set("length", length);
        set("snr_db", snr_db);
        set("class_balance", balance);
        set("sz_tone_hz", sz_tone);
        set("bp_tone_hz", bp_tone);
        set("coupling", coupling);
        set("seed", synth_seed);
        return j;
    }
};

struct RunFlags {
    CohortFlags cohort;
    std::optional<std::string> feature_set, model, out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs, patience, batch_size, top_k, folds;
    std::optional<double> lr;
    std::vector<std::string> eval_manifests;
    bool downsample = false;

    void add(CLI::App* cmd) {
        cohort.add(cmd);
        cmd->add_option("--feature-set", feature_set, "raw_icn, icn_low, icn_mid, icn_high, spectrogram, scalogram, fnc_all, fnc_top20");
        cmd->add_option("--model", model, "CNN1D, CNN3D, LR, SVM, LDA, GNB, KNN, DT or RF");
        cmd->add_option("--seed", seed, "Experiment seed");
        cmd->add_option("--out", out, "Output directory");
        cmd->add_option("--epochs", epochs, "Maximum training epochs");
        cmd->add_option("--patience", patience, "Early-stopping patience");
        cmd->add_option("--batch-size", batch_size, "Mini-batch size");
        cmd->add_option("--lr", lr, "Adam learning rate");
        cmd->add_option("--top-k", top_k, "Selected FNC features for fnc_top20");
        cmd->add_option("--folds", folds, "Cross-validation folds");
        cmd->add_option("--eval-manifest", eval_manifests, "Extra labeled evaluation manifest (repeatable)");
        cmd->add_flag("--downsample-scalogram", downsample, "Halve scalogram time resolution");
    }

    experiment::ExperimentConfig config() const {
        json j = cohort.patch();
        if (feature_set) j["feature_set"] = *feature_set;
        if (model) j["model"] = *model;
        if (seed) j["seed"] = *seed;
        if (out) j["output_dir"] = *out;
        if (epochs) j["train"]["epochs"] = *epochs;
        if (patience) j["train"]["patience"] = *patience;
        if (batch_size) j["train"]["batch_size"] = *batch_size;
        if (lr) j["train"]["lr"] = *lr;
        if (top_k) j["fnc"]["top_k"] = *top_k;
        if (folds) j["classical"]["cv_folds"] = *folds;
        if (!eval_manifests.empty()) j["data"]["eval_manifests"] = eval_manifests;
        if (downsample) j["downsample_scalogram"] = true;
        // A feature set alone implies its first compatible model.
        if (feature_set && !model && !j.contains("model"))
            j["model"] = experiment::compatible_models(experiment::parse_feature_set(*feature_set)).front();
        return experiment::config_from_json(j);
    }
};

const SubjectRecord& find_subject(const Dataset& ds, const std::optional<std::string>& id) {
    if (!id) return ds.subjects.at(0);
    for (const auto& s : ds.subjects)
        if (s.subject_id == *id) return s;
    throw DataError("no subject '" + *id + "' in the cohort");
}

int run(int argc, char** argv) {
    CLI::App app{"Schizophrenia vs bipolar differentiation from ICN time courses"};
    app.require_subcommand(1);
    std::string workdir = ".";
    app.add_option("--workdir", workdir, "Directory all relative paths resolve against");

    // synth
    auto* synth = app.add_subcommand("synth", "Write a seeded synthetic cohort (manifest + ICN CSVs)");
    CohortFlags synth_flags;
    std::string synth_out = "cohort";
    synth_flags.add(synth);
    synth->add_option("--out", synth_out, "Output directory");

    // features
    auto* features = app.add_subcommand("features", "Write FNC vectors or band-filtered ICN files");
    CohortFlags feat_flags;
    std::string feat_kind = "fnc_all", feat_out;
    feat_flags.add(features);
    features->add_option("--kind", feat_kind, "fnc_all, raw_icn, icn_low, icn_mid or icn_high");
    features->add_option("--out", feat_out, "Output file (FNC) or directory (ICN)")->required();

    // train
    auto* train = app.add_subcommand("train", "Run one experiment: features, training, holdout AUC");
    RunFlags train_flags;
    train_flags.add(train);

    // predict
    auto* predict = app.add_subcommand("predict", "Score a cohort with a saved model");
    std::string model_path, predict_manifest, predict_out = "scores.csv";
    predict->add_option("--model", model_path, "Model artifact")->required();
    predict->add_option("--manifest", predict_manifest, "Cohort manifest")->required();
    predict->add_option("--out", predict_out, "Score CSV");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "AUC of a saved model on a labeled cohort");
    std::string eval_model, eval_manifest, eval_out;
    evaluate->add_option("--model", eval_model, "Model artifact")->required();
    evaluate->add_option("--manifest", eval_manifest, "Labeled cohort manifest")->required();
    evaluate->add_option("--out", eval_out, "Optional score CSV");

    // report
    auto* report = app.add_subcommand("report", "Every feature set with every compatible model");
    RunFlags report_flags;
    report_flags.add(report);

    // export-tensor
    auto* exp = app.add_subcommand("export-tensor", "Write one slice of a subject tensor as CSV");
    CohortFlags exp_flags;
    std::optional<std::string> exp_subject;
    std::string exp_kind = "spectrogram", exp_out = "slice.csv";
    std::size_t exp_axis = 2, exp_index = 0;
    exp_flags.add(exp);
    exp->add_option("--subject", exp_subject, "Subject id (default: first)");
    exp->add_option("--kind", exp_kind, "spectrogram or scalogram");
    exp->add_option("--axis", exp_axis, "Axis to slice: 0 frequency/scale, 1 time, 2 channel")->check(CLI::Range(0, 2));
    exp->add_option("--index", exp_index, "Index along the sliced axis");
    exp->add_option("--out", exp_out, "Output CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        fs::current_path(workdir);
    } catch (const fs::filesystem_error& e) {
        throw ConfigError("cannot enter workdir '" + workdir + "': " + e.what());
    }

    if (*synth) {
        auto cfg = experiment::config_from_json(synth_flags.patch());
        const auto path = dataio::write_dataset(dataio::generate_synthetic(cfg.synthetic), synth_out);
        std::cout << "wrote " << path.string() << "\n";
    } else if (*features) {
        const auto cfg = experiment::config_from_json(feat_flags.patch());
        const auto ds = experiment::load_cohort(cfg);
        const auto kind = experiment::parse_feature_set(feat_kind);
        if (kind == experiment::FeatureSet::FncAll) {
            dataio::write_fnc_cache(feat_out, experiment::fnc_matrix(ds));
            std::cout << "wrote " << feat_out << " (" << ds.size() << " x " << fnc::fnc_length(kIcnChannels) << ")\n";
        } else {
            auto c = cfg;
            c.feature_set = kind;
            const auto inputs = experiment::cnn_inputs(ds, c);
            Dataset out = ds;
            for (std::size_t i = 0; i < ds.size(); ++i) {
                const auto& t = inputs[i];
                if (t.shape.size() != 2) throw ConfigError("features --kind must be fnc_all or an ICN set");
                out.subjects[i].icn.data.values() = t.data;
                out.subjects[i].icn.original_length = t.shape[1];
            }
            std::cout << "wrote " << dataio::write_dataset(out, feat_out).string() << "\n";
        }
    } else if (*train) {
        const auto res = experiment::run_experiment(train_flags.config());
        std::cout << res.report.to_csv();
    } else if (*predict) {
        const auto scores = experiment::predict(model_path, predict_manifest, predict_out);
        std::cout << "wrote " << scores.size() << " scores to " << predict_out << "\n";
    } else if (*evaluate) {
        const auto model = dataio::load_model(eval_model);
        const auto ds = experiment::load_for_model(model, eval_manifest);
        const auto scores = experiment::score(model, ds);
        if (!eval_out.empty()) {
            std::string csv = "subject_id,score\n";
            for (std::size_t i = 0; i < ds.size(); ++i)
                csv += ds.subjects[i].subject_id + "," + std::to_string(scores[i]) + "\n";
            dataio::write_text(eval_out, csv);
        }
        std::cout << "auc," << eval::auc(scores, labels_of(ds)) << "\nn," << ds.size() << "\n";
    } else if (*report) {
        std::cout << experiment::run_grid(report_flags.config()).to_csv();
    } else if (*exp) {
        const auto cfg = experiment::config_from_json(exp_flags.patch());
        const auto ds = experiment::load_cohort(cfg);
        const auto& subject = find_subject(ds, exp_subject);
        const auto t = timefreq::stack_subject_tensor(subject.icn, timefreq::parse_tensor_kind(exp_kind), cfg.stft,
                                                      cfg.cwt)
                           .data;
        const std::size_t dims[3] = {t.dim0(), t.dim1(), t.dim2()};
        if (exp_index >= dims[exp_axis])
            throw ConfigError("index " + std::to_string(exp_index) + " out of range for axis " +
                              std::to_string(exp_axis) + " of size " + std::to_string(dims[exp_axis]));
        const std::size_t a = exp_axis == 0 ? 1 : 0, b = exp_axis == 2 ? 1 : 2;
        Matrix m(dims[a], dims[b]);
        for (std::size_t i = 0; i < dims[a]; ++i)
            for (std::size_t j = 0; j < dims[b]; ++j) {
                std::size_t idx[3];
                idx[exp_axis] = exp_index;
                idx[a] = i;
                idx[b] = j;
                m(i, j) = t(idx[0], idx[1], idx[2]);
            }
        dataio::write_matrix_csv(exp_out, m);
        std::cout << "wrote " << exp_out << " (" << m.rows() << " x " << m.cols() << ")\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const szbp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const szbp::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const szbp::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    }
}
