// cogwifi: simulate scenarios, build datasets, train and evaluate models,
// and compare handover / AP-selection policies.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cogwifi/error.hpp"
#include "cogwifi/eval.hpp"
#include "cogwifi/features.hpp"
#include "cogwifi/ml/metrics.hpp"
#include "cogwifi/ml/model_io.hpp"
#include "cogwifi/scenario.hpp"
#include "cogwifi/simcore.hpp"

namespace fs = std::filesystem;
using namespace cogwifi;

namespace {

constexpr int kExitOk = 0, kExitValidation = 2, kExitTraining = 3, kExitIo = 4;

struct Common {
    std::string scenario;
    std::uint64_t seed = 1;
    std::string seeds = "1-10";
    std::string out;
    std::vector<std::string> models;
    std::string ho_policy = "rss_forecast";
    std::string ap_policy = "ssf";
};

ScenarioConfig load_config(const Common& c) {
    return c.scenario.empty() ? load_scenario("") : load_scenario_file(c.scenario);
}

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
}

std::string command_line(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
    return s;
}

Schema detect_schema(const fs::path& csv) {
    std::ifstream in(csv);
    if (!in) throw IoError("cannot open " + csv.string());
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (Schema s : {Schema::Handover, Schema::Throughput, Schema::ApSelection}) {
        std::string h;
        for (const auto& c : csv_header(s)) h += (h.empty() ? "" : ",") + c;
        if (h == line) return s;
    }
    throw ValidationError(csv.string() + ": header matches no dataset schema");
}

// Attaches each --model file to the policy that consumes its schema.
Policies build_policies(const Common& c, std::vector<std::string>& model_hashes) {
    std::shared_ptr<const ml::ForestModel> forest;
    std::shared_ptr<const ml::MlpModel> mlp;
    for (const auto& path : c.models) {
        ml::StoredModel m = ml::load_model(path);
        std::ostringstream h;
        h << std::hex << file_hash(path);
        model_hashes.push_back(path + "#" + h.str());
        if (auto* f = std::get_if<ml::ForestModel>(&m.model); f && m.schema == Schema::Handover)
            forest = std::make_shared<const ml::ForestModel>(std::move(*f));
        else if (auto* n = std::get_if<ml::MlpModel>(&m.model); n && m.schema == Schema::ApSelection)
            mlp = std::make_shared<const ml::MlpModel>(std::move(*n));
        else
            throw ValidationError(path + ": a " + m.algo() + " model on the " + to_string(m.schema)
                                  + " schema is not usable by any policy");
    }
    Policies p;
    switch (parse_ho_policy(c.ho_policy)) {
    case HandoverPolicyKind::Proposed:
        if (!forest) throw ValidationError("model required: --ho-policy proposed needs an rf handover model");
        p.handover = HandoverPolicy::proposed(forest);
        break;
    case HandoverPolicyKind::RssForecast: p.handover = HandoverPolicy::rss_forecast(); break;
    case HandoverPolicyKind::TravelDistance: p.handover = HandoverPolicy::travel_distance(); break;
    }
    switch (parse_ap_policy(c.ap_policy)) {
    case ApPolicyKind::Proposed:
        if (!mlp) throw ValidationError("model required: --ap-policy proposed needs an mlp ap_selection model");
        p.ap_selection = ApSelectionPolicy::proposed(mlp);
        break;
    case ApPolicyKind::Ssf: p.ap_selection = ApSelectionPolicy::ssf(); break;
    case ApPolicyKind::Llf: p.ap_selection = ApSelectionPolicy::llf(); break;
    }
    return p;
}

void print_confusion(const ml::ConfusionMatrix& cm) {
    std::cout << std::fixed << std::setprecision(4);
    std::cout << "                 predicted HO   predicted no-HO\n";
    std::cout << "actual HO        " << std::setw(12) << cm.true_positive_rate() << "   " << std::setw(15)
              << cm.false_negative_rate() << "\n";
    std::cout << "actual no-HO     " << std::setw(12) << cm.false_positive_rate() << "   " << std::setw(15)
              << cm.true_negative_rate() << "\n";
    std::cout << "accuracy " << cm.accuracy() << "  (" << cm.total() << " rows)\n";
}

void print_regression(const std::string& algo, const ml::RegressionReport& r) {
    std::cout << std::fixed << std::setprecision(4);
    std::cout << std::left << std::setw(6) << algo << std::right << " mse " << r.mse << "  r2 " << r.r_squared
              << "  train_time_s " << r.training_time_s << "  (train " << r.n_train << ", test " << r.n_test
              << ")\n";
}

struct TrainOptions {
    std::string data;
    std::string algo = "rf";
    std::uint64_t seed = 7;
    int cv = 0;
    ml::ForestParams forest;
    ml::MlpParams mlp;
    ml::SvrParams svr;
};

ml::ConfusionMatrix rf_holdout(const ml::ForestModel& f, const Dataset& test) {
    std::vector<int> pred, truth;
    for (std::size_t i = 0; i < test.size(); ++i) {
        pred.push_back(ml::rf_predict(f, test.x[i]).label);
        truth.push_back(static_cast<int>(test.y[i]));
    }
    return ml::confusion(pred, truth);
}

// k-fold cross-validation with the same hyperparameters; prints the mean.
void cross_validate(const std::string& algo, const Dataset& ds, const TrainOptions& o) {
    if (algo == "rf") {
        auto folds = ml::kfold_cv<ml::ConfusionMatrix>(ds, o.cv, o.seed, [&](const Dataset& tr, const Dataset& va) {
            return rf_holdout(ml::rf_train(tr, o.forest, o.seed, 1), va);
        });
        ml::ConfusionMatrix sum;
        for (const auto& f : folds) sum += f;
        std::cout << o.cv << "-fold cross-validation (pooled):\n";
        print_confusion(sum);
        return;
    }
    auto folds = ml::kfold_cv<ml::RegressionReport>(ds, o.cv, o.seed, [&](const Dataset& tr, const Dataset& va) {
        if (algo == "mlp") {
            ml::MlpModel m = ml::mlp_fit(tr.x, tr.y, o.mlp, o.seed);
            return ml::evaluate(m, va);
        }
        ml::SvrParams p = o.svr;
        return ml::evaluate(ml::svr_fit(tr.x, tr.y, p), va);
    });
    ml::RegressionReport mean;
    for (const auto& f : folds) {
        mean.mse += f.mse / static_cast<double>(folds.size());
        mean.r_squared += f.r_squared / static_cast<double>(folds.size());
        mean.n_test += f.n_test;
    }
    std::cout << o.cv << "-fold cross-validation mean:\n";
    print_regression(algo, mean);
}

int cmd_simulate(const Common& c, const std::string& cmdline) {
    ScenarioConfig cfg = load_config(c);
    cfg.seed = c.seed;
    validate(cfg);
    std::vector<std::string> hashes;
    const Policies pol = build_policies(c, hashes);
    const fs::path out = c.out.empty() ? fs::path("sim_out") : fs::path(c.out);
    ensure_dir(out);
    const SimulationLog log = run(cfg, pol);
    write_log_csv(log, out);
    std::map<std::string, std::string> extra{{"ho_policy", c.ho_policy}, {"ap_policy", c.ap_policy}};
    for (std::size_t i = 0; i < hashes.size(); ++i) extra["model_" + std::to_string(i)] = hashes[i];
    write_manifest(out, cmdline, cfg, extra);
    std::cout << "ticks " << log.ticks.size() << "  handovers " << log.handovers.size() << "  packets "
              << log.packets.size() << "  unnecessary "
              << (log.ticks.empty() ? 0 : count_unnecessary_handovers(log).back()) << "\n";
    std::cout << "wrote " << out.string() << "\n";
    return kExitOk;
}

int cmd_dataset(const Common& c, const std::string& kind, const std::string& log_dir, const std::string& cmdline) {
    const Schema schema = schema_from_string(kind);
    Dataset ds;
    ScenarioConfig cfg = load_config(c);
    std::map<std::string, std::string> extra{{"kind", kind}};
    if (!log_dir.empty()) {
        const SimulationLog log = read_log_csv(log_dir);
        ds = schema == Schema::Handover     ? build_handover_dataset(log)
             : schema == Schema::Throughput ? build_throughput_dataset(log)
                                            : build_ap_selection_dataset(log);
        extra["log_dir"] = log_dir;
    } else {
        const auto seeds = parse_seed_list(c.seeds);
        ds = schema == Schema::Handover     ? collect_handover_dataset(cfg, seeds)
             : schema == Schema::Throughput ? collect_throughput_dataset(cfg, seeds)
                                            : collect_ap_selection_dataset(cfg, seeds);
        extra["seeds"] = c.seeds;
    }
    validate(ds);
    const fs::path out = c.out.empty() ? fs::path(kind + ".csv") : fs::path(c.out);
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    write_csv(ds, out);
    long positives = 0;
    if (schema == Schema::Handover)
        for (double y : ds.y) positives += y > 0.5;
    std::cout << "rows " << ds.size();
    if (schema == Schema::Handover) std::cout << "  handover=1 rows " << positives;
    std::cout << "\nwrote " << out.string() << "\n";
    (void)cmdline;
    return kExitOk;
}

int cmd_train(const Common& c, TrainOptions o) {
    if (o.data.empty()) throw ValidationError("--data is required");
    const Schema schema = detect_schema(o.data);
    const Dataset ds = read_csv(o.data, schema);
    validate(ds);
    if (o.algo == "rf" && schema != Schema::Handover)
        throw ValidationError("rf classifies handover datasets, got " + to_string(schema));
    if (o.algo != "rf" && schema == Schema::Handover)
        throw ValidationError(o.algo + " regresses throughput targets, got a handover dataset");

    ml::StoredModel stored;
    stored.schema = schema;
    if (o.algo == "rf") {
        const ml::Split s = ml::train_test_split(ds.size(), 0.7, o.seed);
        const Dataset tr = ml::subset(ds, s.train), te = ml::subset(ds, s.test);
        const auto t0 = std::chrono::steady_clock::now();
        ml::ForestModel f = ml::rf_train(tr, o.forest, o.seed);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "rf: " << f.trees.size() << " trees on " << tr.size() << " rows in " << std::setprecision(3)
                  << secs << " s; hold-out " << te.size() << " rows\n";
        print_confusion(rf_holdout(f, te));
        stored.model = std::move(f);
    } else if (o.algo == "mlp") {
        ml::MlpFit fit = ml::mlp_train(ds, o.mlp, o.seed);
        print_regression("mlp", fit.report);
        stored.model = std::move(fit.model);
    } else if (o.algo == "svr") {
        ml::SvrFit fit = ml::svr_train(ds, o.svr, o.seed);
        print_regression("svr", fit.report);
        stored.model = std::move(fit.model);
    } else {
        throw ValidationError("unknown --algo '" + o.algo + "' (rf, mlp, svr)");
    }
    if (o.cv > 1) cross_validate(o.algo, ds, o);
    const fs::path out = c.out.empty() ? fs::path(o.algo + ".model.json") : fs::path(c.out);
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    ml::save_model(stored, out);
    std::cout << "wrote " << out.string() << "\n";
    return kExitOk;
}

int cmd_eval(const Common& c, TrainOptions o) {
    if (c.models.size() != 1) throw ValidationError("eval takes exactly one --model");
    if (o.data.empty()) throw ValidationError("--data is required");
    const ml::StoredModel m = ml::load_model(c.models.front());
    const Dataset ds = read_csv(o.data, m.schema);
    validate(ds);
    if (const auto* f = std::get_if<ml::ForestModel>(&m.model)) {
        print_confusion(rf_holdout(*f, ds));
        o.forest = f->params;
    } else if (const auto* n = std::get_if<ml::MlpModel>(&m.model)) {
        print_regression("mlp", ml::evaluate(*n, ds));
        o.mlp.hidden.assign(n->layers.begin() + 1, n->layers.end() - 1);
    } else {
        const auto& s = std::get<ml::SvrModel>(m.model);
        print_regression("svr", ml::evaluate(s, ds));
        o.svr.C = s.C;
        o.svr.epsilon = s.epsilon;
        o.svr.gamma = s.gamma;
    }
    if (o.cv > 1) cross_validate(m.algo(), ds, o);
    return kExitOk;
}

int cmd_compare(const Common& c, CompareOptions opt, const std::string& train_seeds, const std::string& cmdline) {
    ScenarioConfig cfg = load_config(c);
    validate(cfg);
    opt.seeds = parse_seed_list(c.seeds);
    if (!train_seeds.empty()) opt.training_seeds = parse_seed_list(train_seeds);
    const ExperimentReport rep = compare(cfg, opt);
    const fs::path out = c.out.empty() ? fs::path("compare_out") : fs::path(c.out);
    write_report(rep, out);
    write_manifest(out, cmdline, cfg,
                   {{"seeds", c.seeds}, {"training_seeds", train_seeds.empty() ? "seeds+1000" : train_seeds},
                    {"ap_score", to_string(opt.ap_score)},
                    {"model_seed", std::to_string(opt.model_seed)}});
    std::cout << summary_text(rep);
    std::cout << "wrote " << out.string() << "\n";
    return kExitOk;
}

void add_common(CLI::App* sub, Common& c, bool seeds, bool policies) {
    sub->add_option("--scenario", c.scenario, "Scenario file (key = value); default scenario when omitted")
        ->check(CLI::ExistingFile);
    if (seeds)
        sub->add_option("--seeds", c.seeds, "Seed list, e.g. 1-10 or 3,5,9")->capture_default_str();
    else
        sub->add_option("--seed", c.seed, "Scenario seed")->capture_default_str();
    sub->add_option("--out", c.out, "Output path");
    if (policies) {
        sub->add_option("--ho-policy", c.ho_policy, "Handover policy: proposed, rss_forecast, travel_distance")
            ->capture_default_str();
        sub->add_option("--ap-policy", c.ap_policy, "AP selection policy: proposed, ssf, llf")->capture_default_str();
    }
}

void add_model_params(CLI::App* sub, TrainOptions& o) {
    sub->add_option("--trees", o.forest.n_trees, "Forest size")->capture_default_str();
    sub->add_option("--max-depth", o.forest.max_depth, "Maximum tree depth")->capture_default_str();
    sub->add_option("--epochs", o.mlp.epochs, "MLP epochs")->capture_default_str();
    sub->add_option("--hidden", o.mlp.hidden, "MLP hidden layer widths")->capture_default_str();
    sub->add_option("--lr", o.mlp.learning_rate, "MLP Adam learning rate")->capture_default_str();
    sub->add_option("--svr-c", o.svr.C, "SVR box constraint")->capture_default_str();
    sub->add_option("--svr-epsilon", o.svr.epsilon, "SVR tube half-width (z units)")->capture_default_str();
    sub->add_option("--svr-gamma", o.svr.gamma, "SVR RBF gamma; 0 = 1/n_features")->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cogwifi: cognitive Wi-Fi controller simulator"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 ok, 2 validation error, 3 training error, 4 I/O error.\n\nScenario keys:\n"
               + scenario_key_reference());

    Common c;
    std::string kind = "handover", log_dir, train_seeds, ap_score = "share", ap_ho = "proposed";
    TrainOptions to;
    CompareOptions co;

    auto* sim = app.add_subcommand("simulate", "Run one scenario and write ticks/handovers/packets CSVs");
    add_common(sim, c, false, true);
    sim->add_option("--model", c.models, "Model file(s); rf handover model and/or mlp ap_selection model");

    auto* dset = app.add_subcommand("dataset", "Build an ML dataset CSV from a log directory or fresh runs");
    add_common(dset, c, true, false);
    dset->add_option("--kind", kind, "handover, throughput or ap_selection")->capture_default_str();
    dset->add_option("--log", log_dir, "Directory written by `simulate`; runs the seeds when omitted");

    auto* train = app.add_subcommand("train", "Train rf, mlp or svr on a dataset CSV");
    add_common(train, c, false, false);
    train->add_option("--data", to.data, "Dataset CSV")->required();
    train->add_option("--algo", to.algo, "rf, mlp or svr")->capture_default_str();
    train->add_option("--model-seed", to.seed, "Seed for split, initialisation and bootstraps")->capture_default_str();
    train->add_option("--cv", to.cv, "Also report k-fold cross-validation (k > 1)");
    add_model_params(train, to);

    auto* ev = app.add_subcommand("eval", "Evaluate a stored model on a dataset CSV");
    add_common(ev, c, false, false);
    ev->add_option("--model", c.models, "Model file")->required();
    ev->add_option("--data", to.data, "Dataset CSV")->required();
    ev->add_option("--cv", to.cv, "Also retrain with the model's hyperparameters under k-fold CV");
    ev->add_option("--model-seed", to.seed, "Fold assignment seed")->capture_default_str();

    auto* cmp = app.add_subcommand("compare", "Train models, then run every policy on every seed");
    add_common(cmp, c, true, false);
    cmp->add_option("--training-seeds", train_seeds, "Seeds of the training runs (default: seeds + 1000)");
    cmp->add_option("--threads", co.threads, "Worker threads; 1 runs the seeds serially")->capture_default_str();
    cmp->add_option("--ap-score", ap_score, "Regressor score: marginal, aggregate or share")->capture_default_str();
    cmp->add_option("--ap-runs-handover", ap_ho, "Handover policy used in the AP selection runs")
        ->capture_default_str();
    cmp->add_option("--model-seed", co.model_seed, "Seed for model training")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    const std::string cmdline = command_line(argc, argv);
    try {
        if (*sim) return cmd_simulate(c, cmdline);
        if (*dset) return cmd_dataset(c, kind, log_dir, cmdline);
        if (*train) return cmd_train(c, to);
        if (*ev) return cmd_eval(c, to);
        co.ap_score = parse_ap_score(ap_score);
        co.ap_runs_handover = parse_ho_policy(ap_ho);
        return cmd_compare(c, co, train_seeds, cmdline);
    } catch (const TrainingError& e) {
        std::cerr << "training error: " << e.what() << "\n";
        return kExitTraining;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
