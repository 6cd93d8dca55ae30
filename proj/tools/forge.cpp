// Copyright 2026 The Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "forge/artifact_filter.hpp"
#include "forge/corpus.hpp"
#include "forge/csv.hpp"
#include "forge/errors.hpp"
#include "forge/harness.hpp"
#include "forge/manifest.hpp"
#include "forge/metrics.hpp"
#include "forge/reference_results.hpp"
#include "forge/review_service.hpp"
#include "forge/run_config.hpp"
#include "forge/splits.hpp"
#include "forge/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <regex>

namespace fs = std::filesystem;
using namespace forge;

namespace {

struct UsageError : Error {
    explicit UsageError(const std::string& what) : Error("UsageError", ErrorClass::Validation, what) {}
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("FORGE_SEED")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::strlen(env)) return v;
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string("FORGE_SEED is not an unsigned integer: '") + env + "'");
    }
    return 0;
}

std::optional<std::uint64_t> env_seed() {
    if (!std::getenv("FORGE_SEED")) return std::nullopt;
    return resolve_seed(std::nullopt);
}

fs::path sibling_dir(const fs::path& file) {
    const auto parent = file.parent_path();
    return parent.empty() ? fs::path(".") : parent;
}

fs::path parent_of_dir(const fs::path& dir) {
    fs::path p = fs::absolute(dir).lexically_normal();
    if (p.filename().empty()) p = p.parent_path();
    return p.parent_path();
}

RunConfig load_config_or_default(const std::string& path) {
    if (path.empty()) {
        RunConfig c = RunConfig::defaults(Protocol::KFold, TrainMode::Scratch);
        if (auto s = env_seed()) c.seed = *s;
        return c;
    }
    return load_run_config(path, env_seed());
}

void print_counts(const char* what, const std::array<std::vector<std::string>, 3>& sets) {
    std::printf("%s: train %zu, validation %zu, test %zu\n", what, sets[0].size(), sets[1].size(), sets[2].size());
}

void fail_on_violations(const VerificationReport& report) {
    if (report.ok()) return;
    for (const auto& v : report.violations) std::fprintf(stderr, "violation: %s\n", v.c_str());
    throw FormatError(std::to_string(report.violations.size()) + " split violation(s)");
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forge: microscopy patch curation and classifier benchmarking"};
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "Worker threads for image I/O")->check(CLI::Range(1u, 256u));

    // synth
    auto* synth = app.add_subcommand("synth", "Write the synthetic 5-class corpus");
    std::string synth_out;
    SynthOptions synth_opts;
    std::optional<std::uint64_t> synth_seed;
    synth->add_option("--output", synth_out, "Output directory")->required();
    synth->add_option("--images-per-class", synth_opts.images_per_class)->check(CLI::PositiveNumber);
    synth->add_option("--width", synth_opts.width)->check(CLI::Range(8, 20000));
    synth->add_option("--height", synth_opts.height)->check(CLI::Range(8, 20000));
    synth->add_option("--seed", synth_seed);

    // patch
    auto* patch = app.add_subcommand("patch", "Cut labelled images into square patches");
    std::string patch_in, patch_labels, patch_out, patch_manifest;
    int patch_size = 500;
    patch->add_option("--input", patch_in, "Directory of source images")->required();
    patch->add_option("--labels", patch_labels, "CSV source_image,class")->required();
    patch->add_option("--output", patch_out, "Patch directory")->required();
    patch->add_option("--patch-size", patch_size)->check(CLI::PositiveNumber);
    patch->add_option("--manifest", patch_manifest, "Manifest path (default <output>/manifest.csv)");

    // filter
    auto* filter = app.add_subcommand("filter", "Classify patches as keep, reject or needs-review");
    std::string filter_manifest, filter_patches, filter_calibrate, filter_report, filter_config;
    filter->add_option("--manifest", filter_manifest)->required();
    filter->add_option("--patches", filter_patches, "Patch directory (default: the manifest's directory)");
    filter->add_option("--calibrate", filter_calibrate, "CSV patch_id,label with label keep|reject");
    filter->add_option("--report", filter_report, "Report path (default <manifest dir>/filter_report.csv)");
    filter->add_option("--config", filter_config, "Run config supplying thresholds");

    // review
    auto* review = app.add_subcommand("review", "Serve the manual review queue");
    std::string review_manifest, review_patches, review_ui, review_host = "127.0.0.1";
    int review_port = 8080;
    review->add_option("--manifest", review_manifest)->required();
    review->add_option("--port", review_port)->check(CLI::Range(0, 65535));
    review->add_option("--patches", review_patches);
    review->add_option("--ui", review_ui, "Static UI bundle served at /");
    review->add_option("--host", review_host);

    // split
    auto* split = app.add_subcommand("split", "Stratified train/validation/test split");
    std::string split_manifest, split_ratios = "85,15", split_out;
    std::optional<std::uint64_t> split_seed;
    std::optional<int> split_cap;
    bool split_group = false;
    split->add_option("--manifest", split_manifest)->required();
    split->add_option("--ratios", split_ratios, "train,validation[,test] percentages");
    split->add_option("--seed", split_seed);
    split->add_option("--per-class-cap", split_cap)->check(CLI::PositiveNumber);
    split->add_flag("--group-by-source", split_group);
    split->add_option("--output", split_out, "Output manifest (default <manifest dir>/split.csv)");

    // kfold
    auto* kfold = app.add_subcommand("kfold", "Stratified k-fold plan");
    std::string kfold_manifest, kfold_out;
    int kfold_k = 10;
    double kfold_val = 0.15;
    std::optional<std::uint64_t> kfold_seed;
    std::optional<int> kfold_cap;
    bool kfold_group = false;
    kfold->add_option("--manifest", kfold_manifest)->required();
    kfold->add_option("--k", kfold_k)->check(CLI::Range(2, 1000));
    kfold->add_option("--validation-fraction", kfold_val)->check(CLI::Range(0.0, 0.999));
    kfold->add_option("--seed", kfold_seed);
    kfold->add_option("--per-class-cap", kfold_cap)->check(CLI::PositiveNumber);
    kfold->add_flag("--group-by-source", kfold_group);
    kfold->add_option("--output", kfold_out, "Plan directory (default <manifest dir>/folds)");

    // train
    auto* trainc = app.add_subcommand("train", "Train the reference CNN on a split");
    std::string train_config, train_split, train_patches, train_out;
    trainc->add_option("--config", train_config, "Run config (JSON)");
    trainc->add_option("--split", train_split, "Manifest with split column")->required();
    trainc->add_option("--patches", train_patches);
    trainc->add_option("--output", train_out, "Output directory (default <split dir>/run)");

    // kfold-run
    auto* kfrun = app.add_subcommand("kfold-run", "Run every fold of a plan");
    std::string kfr_config, kfr_plan, kfr_backend, kfr_out, kfr_model, kfr_patches;
    kfrun->add_option("--config", kfr_config);
    kfrun->add_option("--plan", kfr_plan, "Directory of fold_<i>.csv")->required();
    kfrun->add_option("--backend", kfr_backend, "External command, run as '<cmd> <job dir>'");
    kfrun->add_option("--model", kfr_model, "Model name for the results (default MicroCNN or external)");
    kfrun->add_option("--output", kfr_out, "Results directory (default <plan>/results)");
    kfrun->add_option("--patches", kfr_patches);

    // report
    auto* report = app.add_subcommand("report", "Render fold results as tables");
    std::string report_results, report_out;
    bool report_published = false;
    report->add_option("--results", report_results, "Directory of <model>_<mode>.csv fold results");
    report->add_option("--output", report_out, "Report directory (default <results>/report)");
    report->add_flag("--published", report_published, "Render the published benchmark tables instead");

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp&) {
            std::cout << app.help();
            return 0;
        } catch (const CLI::CallForAllHelp&) {
            std::cout << app.help("", CLI::AppFormatMode::All);
            return 0;
        } catch (const CLI::ParseError& e) {
            throw UsageError(e.what());
        }

        if (*synth) {
            synth_opts.seed = resolve_seed(synth_seed);
            const auto labels = write_synthetic_corpus(synth_out, synth_opts);
            std::printf("wrote %zu images and labels.csv to %s\n", labels.size(), synth_out.c_str());
        } else if (*patch) {
            const auto labels = read_source_labels(patch_labels);
            const auto inv = label_inventory(labels);
            const Manifest m = patch_corpus(patch_in, labels, patch_out, patch_size, threads);
            const fs::path out = patch_manifest.empty() ? fs::path(patch_out) / "manifest.csv" : fs::path(patch_manifest);
            write_manifest(out, m);
            std::printf("sources per class:");
            for (ClassLabel c : kAllClasses) {
                std::printf(" %s=%d", std::string(to_string(c)).c_str(), inv[static_cast<std::size_t>(c)]);
            }
            std::printf("\n%zu patches, manifest %s\n", m.rows.size(), out.string().c_str());
        } else if (*filter) {
            Manifest m = read_manifest(filter_manifest);
            const fs::path patches = filter_patches.empty() ? sibling_dir(filter_manifest) : fs::path(filter_patches);
            FilterThresholds t = filter_config.empty() ? FilterThresholds{} : load_run_config(filter_config).filter;
            if (!filter_calibrate.empty()) {
                const auto table = csv::read(filter_calibrate);
                const auto c_id = table.column("patch_id");
                const auto c_label = table.column("label");
                std::vector<LabeledStats> labeled;
                for (const auto& row : table.rows) {
                    const std::string& label = row[c_label];
                    if (label != "keep" && label != "reject") {
                        throw FormatError("calibration label must be keep or reject, got '" + label + "'");
                    }
                    const fs::path p = patch_path(patches, row[c_id]);
                    if (!fs::exists(p)) throw MissingPatchFile("missing patch image " + p.string());
                    labeled.push_back({region_stats(to_luminance(read_image(p))), label == "keep"});
                }
                const Calibration cal = calibrate_thresholds(labeled, t.review_band);
                t = cal.thresholds;
                std::printf("calibrated: dark_mean=%.2f dark_p95=%.2f blank_contrast=%.2f review_band=%.2f f1=%.6f\n",
                            t.dark_mean, t.dark_p95, t.blank_contrast, t.review_band, cal.f1);
            }
            t.validate();
            const FilterReport r = filter_run(m, patches, t, threads);
            const fs::path report_path =
                filter_report.empty() ? sibling_dir(filter_manifest) / "filter_report.csv" : fs::path(filter_report);
            csv::write_text(report_path, format_filter_report(r));
            write_manifest(filter_manifest, m);
            std::printf("keep %d, reject_dark %d, reject_blank %d, needs_review %d, manual %d\n",
                        r.count(Verdict::Keep), r.count(Verdict::RejectDark), r.count(Verdict::RejectBlank),
                        r.count(Verdict::NeedsReview), r.count(Verdict::ManualKeep) + r.count(Verdict::ManualReject));
        } else if (*review) {
            const fs::path patches = review_patches.empty() ? sibling_dir(review_manifest) : fs::path(review_patches);
            sigset_t set;
            sigemptyset(&set);
            sigaddset(&set, SIGINT);
            sigaddset(&set, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &set, nullptr);
            std::optional<fs::path> ui;
            if (!review_ui.empty()) ui = review_ui;
            ReviewService service(review_manifest, patches, ui);
            const int port = service.start(review_host, review_port);
            const auto p = service.progress();
            std::printf("serving http://%s:%d/ (%d pending of %d)\n", review_host.c_str(), port, p.pending, p.total);
            std::fflush(stdout);
            int sig = 0;
            sigwait(&set, &sig);
            service.stop();
            std::printf("stopped; manifest written\n");
        } else if (*split) {
            const Manifest m = read_manifest(split_manifest);
            SplitOptions opts{resolve_seed(split_seed), split_cap, split_group};
            const SplitAssignment a = holdout_split(m, SplitRatios::parse(split_ratios), opts);
            fail_on_violations(verify_split(m, a));
            const fs::path out = split_out.empty() ? sibling_dir(split_manifest) / "split.csv" : fs::path(split_out);
            write_manifest(out, apply_sets(m, a.sets));
            print_counts("split", a.sets);
        } else if (*kfold) {
            const Manifest m = read_manifest(kfold_manifest);
            SplitOptions opts{resolve_seed(kfold_seed), kfold_cap, kfold_group};
            const FoldPlan plan = kfold_plan(m, kfold_k, kfold_val, opts);
            fail_on_violations(verify_split(m, plan));
            const fs::path out = kfold_out.empty() ? sibling_dir(kfold_manifest) / "folds" : fs::path(kfold_out);
            write_fold_plan(out, m, plan);
            for (std::size_t i = 0; i < plan.folds.size(); ++i) {
                print_counts(("fold " + std::to_string(i)).c_str(), plan.folds[i].sets);
            }
        } else if (*trainc) {
            RunConfig config = load_config_or_default(train_config);
            config.threads = std::max(config.threads, threads);
            const Manifest m = read_manifest(train_split);
            const fs::path patches = !train_patches.empty()       ? fs::path(train_patches)
                                     : !config.patch_dir.empty() ? fs::path(config.patch_dir)
                                                                 : sibling_dir(train_split);
            const fs::path out = train_out.empty() ? sibling_dir(train_split) / "run" : fs::path(train_out);
            auto load = [&](Split s) {
                const auto ids = ids_in_split(m, s);
                return load_samples(m, ids, patches, config.input_size, config.threads);
            };
            const SampleSet train_set = load(Split::Train);
            const SampleSet validation = load(Split::Validation);
            const SampleSet test = load(Split::Test);
            auto model = make_model(config, config.seed);
            const TrainRecord record = train(config, model, train_set, validation, [](const EpochMetrics& e) {
                std::printf("epoch %d: loss %.4f acc %.4f val_loss %.4f val_acc %.4f\n", e.epoch, e.train_loss,
                            e.train_accuracy, e.validation_loss, e.validation_accuracy);
                std::fflush(stdout);
            });
            fs::create_directories(out);
            nn::save_checkpoint(out / "model.bin", model);
            csv::write_text(out / "curves.csv", export_curves(record));
            nlohmann::json summary = {
                {"stop_epoch", record.stop_epoch},
                {"stop_reason", record.stop_reason == StopReason::EarlyStop ? "early_stop" : "completed"}};
            if (!test.empty()) {
                const EvalResult eval = evaluate(model, test, config.test_batch);
                summary["test"] = {{"loss", eval.loss}, {"accuracy", eval.accuracy}, {"samples", eval.samples},
                                   {"batches", eval.batches}};
                std::printf("test: loss %.4f accuracy %.4f (%lld samples, %d batches)\n", eval.loss, eval.accuracy,
                            eval.samples, eval.batches);
            }
            csv::write_text(out / "summary.json", summary.dump(2) + "\n");
            std::printf("stopped at epoch %d (%s); outputs in %s\n", record.stop_epoch,
                        record.stop_reason == StopReason::EarlyStop ? "early stop" : "completed", out.string().c_str());
        } else if (*kfrun) {
            RunConfig config = load_config_or_default(kfr_config);
            config.threads = std::max(config.threads, threads);
            const auto folds = read_fold_plan(kfr_plan);
            if (folds.empty()) throw DataUnavailable("no fold_<i>.csv files in " + kfr_plan);
            const fs::path out = kfr_out.empty() ? fs::path(kfr_plan) / "results" : fs::path(kfr_out);
            fs::create_directories(out);
            std::vector<FoldResult> results;
            std::string model = kfr_model;
            const fs::path patches = !kfr_patches.empty()        ? fs::path(kfr_patches)
                                     : !config.patch_dir.empty() ? fs::path(config.patch_dir)
                                                                 : parent_of_dir(kfr_plan);
            if (!kfr_backend.empty()) {
                if (model.empty()) model = "external";
                config.patch_dir = fs::absolute(patches).string();
                results = external_backend_run(config, folds, kfr_backend, out / "job");
            } else {
                if (model.empty()) model = "MicroCNN";
                const auto runs = kfold_run_native(config, folds, patches);
                fs::create_directories(out / "curves");
                for (const auto& run : runs) {
                    results.push_back(run.result);
                    csv::write_text(out / "curves" /
                                        (model + "_" + std::string(to_string(config.mode)) + "_fold" +
                                         std::to_string(run.result.fold) + ".csv"),
                                    export_curves(run.record));
                }
            }
            const std::string stem = model + "_" + std::string(to_string(config.mode));
            csv::write_text(out / (stem + ".csv"), format_fold_results(results));
            const RunSummary s = fold_stats(results);
            std::printf("%s: average loss %s, average accuracy %s%%, std %s%% over %zu folds\n", stem.c_str(),
                        fmt3(s.average_loss).c_str(), fmt3(s.average_accuracy).c_str(), fmt3(s.std_accuracy).c_str(),
                        results.size());
        } else if (*report) {
            std::vector<ModelRun> runs;
            fs::path out;
            if (report_published) {
                const auto check = check_published_tables();
                for (const auto& note : check.notes) std::printf("note: %s\n", note.c_str());
                runs = published_runs();
                if (report_out.empty() && report_results.empty()) throw UsageError("--published needs --output");
                out = report_out.empty() ? fs::path(report_results) / "report" : fs::path(report_out);
            } else {
                if (report_results.empty()) throw UsageError("--results is required");
                out = report_out.empty() ? fs::path(report_results) / "report" : fs::path(report_out);
                if (!fs::is_directory(report_results)) throw IoError("not a directory: " + report_results);
                const std::regex name(R"(^(.+)_(transfer|scratch)\.csv$)");
                std::vector<fs::path> files;
                for (const auto& entry : fs::directory_iterator(report_results)) {
                    if (entry.is_regular_file()) files.push_back(entry.path());
                }
                std::sort(files.begin(), files.end());
                for (const auto& f : files) {
                    std::smatch match;
                    const std::string fname = f.filename().string();
                    if (!std::regex_match(fname, match, name)) continue;
                    runs.push_back({match[1], match[2], parse_fold_results(csv::read_text(f)), {}});
                }
            }
            if (runs.empty()) {
                std::printf("no fold results found; nothing written\n");
                return 0;
            }
            fs::create_directories(out);
            render_report(runs, out);
            std::cout << format_comparison(runs);
            std::printf("report written to %s\n", out.string().c_str());
        }
        return 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s: %s\n", e.kind().c_str(), e.what());
        return static_cast<int>(e.error_class());
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: IoError: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: InternalError: %s\n", e.what());
        return 2;
    }
}
