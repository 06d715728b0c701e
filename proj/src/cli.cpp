#include "osaom/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "osaom/analysis.hpp"
#include "osaom/data_prep.hpp"
#include "osaom/errors.hpp"
#include "osaom/version.hpp"

namespace osaom {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v, const char* spec = "%.12g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        while (!item.empty() && item.front() == ' ') item.erase(item.begin());
        while (!item.empty() && item.back() == ' ') item.pop_back();
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<EffectSpec> effects_from_key(const KeyValueConfig& cfg, Dependent d,
                                         const std::string& key) {
    std::vector<EffectSpec> out;
    if (!cfg.has(key)) return out;
    for (const auto& item : split_csv(cfg.get(key))) out.push_back(parse_effect(d, item));
    return out;
}

// Resolve a path in the config relative to the config file location.
std::string resolve_path(const KeyValueConfig& cfg, const std::string& value) {
    fs::path p(value);
    if (p.is_absolute() || cfg.origin().empty()) return value;
    fs::path base = fs::path(cfg.origin()).parent_path();
    return (base / p).string();
}

void require_binary(const ObservedMatrix& m, const std::string& path) {
    for (int i = 0; i < m.n(); ++i)
        for (int j = 0; j < m.n(); ++j)
            if (i != j && !m.missing(i, j) && m.at(i, j) != 0 && m.at(i, j) != 1)
                throw DataError("file " + path + ": entry " + std::to_string(m.at(i, j)) +
                                " at (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                ") is not 0/1/NA");
}

int actor_index(const Panel& panel, const std::string& token) {
    for (int i = 0; i < panel.n; ++i)
        if (panel.labels[i] == token) return i;
    return -1;
}

}  // namespace

Panel load_panel(const KeyValueConfig& cfg, bool allow_single_wave) {
    Panel panel;
    const int waves = cfg.has("waves") ? cfg.get_int("waves") : 0;
    if (waves < 1) throw ConfigError("config needs 'waves = <count>'");
    if (waves < 2 && !allow_single_wave)
        throw ConfigError("a panel needs at least 2 waves (got " + std::to_string(waves) + ")");
    panel.grid = cfg.has("behavior.grid") ? cfg.get_int("behavior.grid") : 13;
    panel.behavior_name = cfg.get_or("behavior.name", "behavior");

    // ---- networks: either ordinal ratings + cutoffs, or binary level files
    const bool from_ratings = cfg.has("ratings.wave.1");
    for (int m = 1; m <= waves; ++m) {
        ObservedWave wave;
        if (from_ratings) {
            const std::string path = resolve_path(cfg, cfg.get("ratings.wave." + std::to_string(m)));
            const ObservedMatrix ratings = read_matrix_file(path);
            const int weak_cut = cfg.has("weak.cutoff") ? cfg.get_int("weak.cutoff") : 2;
            const int strong_cut = cfg.has("strong.cutoff") ? cfg.get_int("strong.cutoff") : 5;
            auto [weak, strong] = dichotomize(ratings, weak_cut, strong_cut);
            wave.weak = weak;
            wave.strong = strong;
        } else {
            const std::string weak_path =
                resolve_path(cfg, cfg.get("weak.wave." + std::to_string(m)));
            const std::string strong_path =
                resolve_path(cfg, cfg.get("strong.wave." + std::to_string(m)));
            wave.weak = read_matrix_file(weak_path);
            wave.strong = read_matrix_file(strong_path);
            require_binary(wave.weak, weak_path);
            require_binary(wave.strong, strong_path);
        }
        if (panel.n == 0) {
            panel.n = wave.weak.n();
            panel.labels.resize(panel.n);
            for (int i = 0; i < panel.n; ++i) panel.labels[i] = std::to_string(i + 1);
        }
        if (wave.weak.n() != panel.n || wave.strong.n() != panel.n)
            throw DataError("wave " + std::to_string(m) + ": matrix size differs from wave 1");
        wave.behavior.assign(panel.n, kMissingBehavior);
        panel.waves.push_back(std::move(wave));
    }
    if (cfg.has("actors") && cfg.get_int("actors") != panel.n)
        throw DataError("config says actors = " + cfg.get("actors") + " but matrices have " +
                        std::to_string(panel.n) + " rows");

    // ---- actor covariates (optional table with an `id` column)
    if (cfg.has("actor.covariates")) {
        const std::string path = resolve_path(cfg, cfg.get("actor.covariates"));
        TextTable table = read_table_file(path);
        const int id_col = table.column("id");
        if (id_col < 0) throw DataError("file " + path + ": missing 'id' column");
        if (static_cast<int>(table.rows.size()) != panel.n)
            throw DataError("file " + path + ": expected " + std::to_string(panel.n) + " rows");
        // id column defines the actor labels
        for (int i = 0; i < panel.n; ++i) panel.labels[i] = table.rows[i][id_col];
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (static_cast<int>(c) == id_col) continue;
            ActorCovariate cov;
            cov.name = table.header[c];
            cov.categorical =
                cfg.get_or("covariate." + cov.name + ".type", "numeric") == "categorical";
            cov.values.resize(panel.n);
            for (int i = 0; i < panel.n; ++i) {
                const std::string& tok = table.rows[i][c];
                if (tok == "NA" || tok == "na" || tok == ".") {
                    cov.values[i] = std::nan("");
                } else {
                    try {
                        cov.values[i] = std::stod(tok);
                    } catch (const std::exception&) {
                        throw DataError("file " + path + ": covariate " + cov.name +
                                        " value '" + tok + "' is not numeric (categories must "
                                        "be coded as numbers)");
                    }
                }
            }
            panel.actor_covariates.push_back(std::move(cov));
        }
    }

    // ---- dyadic covariates
    for (const auto& key : cfg.keys_with_prefix("dyadic.covariate.")) {
        DyadicCovariate cov;
        cov.name = key.substr(std::string("dyadic.covariate.").size());
        const std::string path = resolve_path(cfg, cfg.get(key));
        const ObservedMatrix m = read_matrix_file(path);
        if (m.n() != panel.n)
            throw DataError("file " + path + ": size differs from the network matrices");
        cov.w = RealMatrix(panel.n);
        for (int i = 0; i < panel.n; ++i)
            for (int j = 0; j < panel.n; ++j)
                if (i != j) cov.w.set(i, j, m.missing(i, j) ? 0.0 : m.at(i, j));
        panel.dyadic_covariates.push_back(std::move(cov));
    }

    // ---- behavior: per-wave columns or daily ratings + aggregation window
    if (cfg.has("behavior.wave.1")) {
        for (int m = 1; m <= waves; ++m) {
            const std::string path =
                resolve_path(cfg, cfg.get("behavior.wave." + std::to_string(m)));
            panel.waves[m - 1].behavior = read_behavior_file(path, panel.n);
        }
    } else if (cfg.has("behavior.daily")) {
        const std::string path = resolve_path(cfg, cfg.get("behavior.daily"));
        TextTable table = read_table_file(path);
        const int a_col = table.column("actor"), d_col = table.column("date"),
                  r_col = table.column("rating");
        if (a_col < 0 || d_col < 0 || r_col < 0)
            throw DataError("file " + path + ": needs columns actor, date, rating");
        std::vector<DailyRating> daily;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            DailyRating entry;
            entry.actor = actor_index(panel, table.rows[r][a_col]);
            if (entry.actor < 0)
                throw DataError("file " + path + " row " + std::to_string(r + 2) +
                                ": unknown actor '" + table.rows[r][a_col] + "'");
            entry.day = parse_date(table.rows[r][d_col]);
            entry.rating = std::stod(table.rows[r][r_col]);
            if (entry.rating < 1.0 || entry.rating > 7.0)
                throw DataError("file " + path + " row " + std::to_string(r + 2) +
                                ": rating outside 1..7");
            daily.push_back(entry);
        }
        const int window = cfg.has("behavior.window_days") ? cfg.get_int("behavior.window_days")
                                                           : 30;
        for (int m = 1; m <= waves; ++m) {
            const long day = parse_date(cfg.get("wave.date." + std::to_string(m)));
            auto means = aggregate_behavior(daily, panel.n, window, day);
            for (int i = 0; i < panel.n; ++i)
                if (means[i]) panel.waves[m - 1].behavior[i] = recode_behavior(*means[i]);
        }
    }

    if (cfg.has("behavior.zbar")) panel.zbar_override = cfg.get_double("behavior.zbar");
    if (cfg.has("behavior.range")) panel.z_range_override = cfg.get_double("behavior.range");
    if (cfg.has("behavior.simhat")) panel.z_sim_mean_override = cfg.get_double("behavior.simhat");

    panel.finalize();
    return panel;
}

ModelSpec load_model(const KeyValueConfig& cfg, const Panel& panel) {
    return ModelSpec(panel, effects_from_key(cfg, Dependent::Weak, "effects.weak"),
                     effects_from_key(cfg, Dependent::Strong, "effects.strong"),
                     effects_from_key(cfg, Dependent::Behavior, "effects.behavior"));
}

Eigen::VectorXd load_parameters(const KeyValueConfig& cfg, const ModelSpec& model,
                                const ParamLayout& layout) {
    Eigen::VectorXd params = Eigen::VectorXd::Zero(layout.size());
    for (int d = 0; d < kDependents; ++d) {
        const Dependent dep = static_cast<Dependent>(d);
        for (int m = 0; m < layout.periods; ++m) {
            const std::string per_period =
                "rate." + std::string(to_string(dep)) + "." + std::to_string(m + 1);
            const std::string shared = "rate." + std::string(to_string(dep));
            double rate;
            if (cfg.has(per_period))
                rate = cfg.get_double(per_period);
            else if (cfg.has(shared))
                rate = cfg.get_double(shared);
            else
                throw ConfigError("missing rate parameter '" + shared + "'");
            if (!(rate > 0.0)) throw ConfigError("rate '" + shared + "' must be positive");
            params[layout.rate_index(dep, m)] = rate;
        }
        const auto& effects = model.effects(dep);
        for (std::size_t k = 0; k < effects.size(); ++k) {
            const std::string key = "theta." + effects[k].spec().qualified();
            params[layout.effect_index(dep, static_cast<int>(k))] =
                cfg.has(key) ? cfg.get_double(key) : 0.0;
        }
    }
    return params;
}

EstimationOptions load_estimation_options(const KeyValueConfig& cfg) {
    EstimationOptions opt;
    if (cfg.has("estimate.phase1_runs")) opt.phase1_runs = cfg.get_int("estimate.phase1_runs");
    if (cfg.has("estimate.subphases")) opt.phase2_subphases = cfg.get_int("estimate.subphases");
    if (cfg.has("estimate.phase2_base"))
        opt.phase2_base_iterations = cfg.get_int("estimate.phase2_base");
    if (cfg.has("estimate.gain")) opt.gain = cfg.get_double("estimate.gain");
    if (cfg.has("estimate.phase3_runs")) opt.phase3_runs = cfg.get_int("estimate.phase3_runs");
    if (cfg.has("estimate.max_retries")) opt.max_retries = cfg.get_int("estimate.max_retries");
    if (cfg.has("seed")) opt.seed = static_cast<std::uint64_t>(cfg.get_double("seed"));
    if (cfg.has("threads")) opt.threads = cfg.get_int("threads");
    return opt;
}

void write_result_file(const std::string& path, const EstimationResult& result) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file " + path);
    const int p = static_cast<int>(result.theta.size());
    out << "# osaom estimation result\n";
    out << "version = " << kVersion << "\n";
    out << "converged = " << (result.converged ? 1 : 0) << "\n";
    out << "mcr = " << fmt(result.mcr) << "\n";
    out << "retries = " << result.retries_used << "\n";
    out << "periods = " << result.layout.periods << "\n";
    out << "grid = " << result.grid << "\n";
    out << "zbar = " << fmt(result.zbar) << "\n";
    out << "z.range = " << fmt(result.z_range) << "\n";
    out << "z.simhat = " << fmt(result.z_sim_mean) << "\n";
    for (int d = 0; d < kDependents; ++d)
        out << "effects." << to_string(static_cast<Dependent>(d)) << " = "
            << result.layout.effect_counts[d] << "\n";
    out << "params = " << p << "\n";
    for (int k = 0; k < p; ++k) {
        const std::string stem = "param." + std::to_string(k + 1);
        out << stem << ".name = " << result.param_names[k] << "\n";
        out << stem << ".theta = " << fmt(result.theta[k]) << "\n";
        out << stem << ".se = " << fmt(result.se[k]) << "\n";
        out << stem << ".tconv = " << fmt(result.tconv[k]) << "\n";
    }
    auto write_vector = [&](const std::string& key, const Eigen::VectorXd& v) {
        out << key << " =";
        for (int k = 0; k < v.size(); ++k) out << ' ' << fmt(v[k]);
        out << '\n';
    };
    auto write_matrix = [&](const std::string& key, const Eigen::MatrixXd& m) {
        for (int r = 0; r < m.rows(); ++r) {
            out << key << "." << (r + 1) << " =";
            for (int c = 0; c < m.cols(); ++c) out << ' ' << fmt(m(r, c));
            out << '\n';
        }
    };
    write_vector("observed", result.observed);
    write_vector("simmean", result.sim_mean);
    write_matrix("cov", result.cov_theta);
    write_matrix("deriv", result.deriv);
    write_matrix("sigma", result.sigma);
    for (std::size_t w = 0; w < result.warnings.size(); ++w)
        out << "warning." << (w + 1) << " = " << result.warnings[w] << "\n";
}

EstimationResult read_result_file(const std::string& path) {
    KeyValueConfig cfg = KeyValueConfig::from_file(path);
    EstimationResult r;
    const int p = cfg.get_int("params");
    r.converged = cfg.get_int("converged") != 0;
    r.mcr = cfg.get_double("mcr");
    r.retries_used = cfg.get_int("retries");
    r.grid = cfg.get_int("grid");
    r.zbar = cfg.get_double("zbar");
    r.z_range = cfg.get_double("z.range");
    r.z_sim_mean = cfg.get_double("z.simhat");
    r.layout.periods = cfg.get_int("periods");
    for (int d = 0; d < kDependents; ++d)
        r.layout.effect_counts[d] =
            cfg.get_int("effects." + std::string(to_string(static_cast<Dependent>(d))));
    r.theta.resize(p);
    r.se.resize(p);
    r.tconv.resize(p);
    for (int k = 0; k < p; ++k) {
        const std::string stem = "param." + std::to_string(k + 1);
        r.param_names.push_back(cfg.get(stem + ".name"));
        r.theta[k] = cfg.get_double(stem + ".theta");
        r.se[k] = cfg.get_double(stem + ".se");
        r.tconv[k] = cfg.get_double(stem + ".tconv");
    }
    auto read_vector = [&](const std::string& key) {
        std::istringstream ss(cfg.get(key));
        Eigen::VectorXd v(p);
        for (int k = 0; k < p; ++k) ss >> v[k];
        if (!ss) throw DataError("file " + path + ": malformed vector '" + key + "'");
        return v;
    };
    auto read_matrix = [&](const std::string& key) {
        Eigen::MatrixXd m(p, p);
        for (int row = 0; row < p; ++row) {
            std::istringstream ss(cfg.get(key + "." + std::to_string(row + 1)));
            for (int c = 0; c < p; ++c) ss >> m(row, c);
            if (!ss) throw DataError("file " + path + ": malformed matrix '" + key + "'");
        }
        return m;
    };
    r.observed = read_vector("observed");
    r.sim_mean = read_vector("simmean");
    r.cov_theta = read_matrix("cov");
    r.deriv = read_matrix("deriv");
    r.sigma = read_matrix("sigma");
    return r;
}

namespace {

struct CommandContext {
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    KeyValueConfig config;

    void load_config(bool required) {
        if (config_path.empty()) {
            if (required) throw ConfigError("this command needs --config <file>");
            config = KeyValueConfig::from_string("", "<none>");
        } else {
            config = KeyValueConfig::from_file(config_path);
        }
        for (const auto& item : overrides) {
            auto eq = item.find('=');
            if (eq == std::string::npos)
                throw ConfigError("--set expects key=value, got '" + item + "'");
            config.set(item.substr(0, eq), item.substr(eq + 1));
        }
        if (seed) config.set("seed", std::to_string(*seed));
        if (threads) config.set("threads", std::to_string(*threads));
    }

    std::uint64_t seed_value() const {
        return config.has("seed") ? static_cast<std::uint64_t>(config.get_double("seed")) : 1;
    }
    int thread_value() const { return config.has("threads") ? config.get_int("threads") : 0; }

    std::string out_path(const std::string& name) {
        fs::create_directories(out_dir);
        outputs.push_back(name);
        return (fs::path(out_dir) / name).string();
    }

    void write_manifest(const std::string& command) {
        fs::create_directories(out_dir);
        std::ofstream out(fs::path(out_dir) / "manifest.txt");
        out << "command = " << command << "\n";
        out << "engine = osaom " << kVersion << "\n";
        out << "seed = " << seed_value() << "\n";
        out << "threads = " << thread_value() << "\n";
        out << "config.file = " << (config_path.empty() ? "<none>" : config_path) << "\n";
        for (const auto& key : config.keys())
            out << "config." << key << " = " << config.get(key) << "\n";
        for (std::size_t k = 0; k < outputs.size(); ++k)
            out << "output." << (k + 1) << " = " << outputs[k] << "\n";
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        out << "wall.seconds = " << fmt(secs, "%.3f") << "\n";
    }
};

std::string significance(double theta, double se) {
    if (se <= 0.0) return "";
    const double p = two_sided_normal_p(theta / se);
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    if (p < 0.10) return "+";
    return "";
}

// Human-readable estimates table; layout mirrors the usual SAOM reporting
// (rates first, then effects per dependent, stars from the z ratio).
void write_estimates_table(const std::string& path, const EstimationResult& r) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file " + path);
    out << "# significance: *** p<.001, ** p<.01, * p<.05, + p<.10 (two-sided z)\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%-34s %12s %10s %10s  %s\n", "parameter", "theta", "se",
                  "tconv", "sig");
    out << line;
    for (int k = 0; k < r.theta.size(); ++k) {
        std::snprintf(line, sizeof(line), "%-34s %12.4f %10.4f %10.4f  %s\n",
                      r.param_names[k].c_str(), r.theta[k], r.se[k], r.tconv[k],
                      significance(r.theta[k], r.se[k]).c_str());
        out << line;
    }
    out << "mcr = " << fmt(r.mcr, "%.4f") << "\n";
    out << "converged = " << (r.converged ? "yes" : "no") << "\n";
}

int find_param(const EstimationResult& r, const std::string& name) {
    for (std::size_t k = 0; k < r.param_names.size(); ++k)
        if (r.param_names[k] == name) return static_cast<int>(k);
    return -1;
}

int find_param_prefix(const EstimationResult& r, const std::string& prefix) {
    for (std::size_t k = 0; k < r.param_names.size(); ++k)
        if (r.param_names[k].rfind(prefix, 0) == 0) return static_cast<int>(k);
    return -1;
}

int cmd_describe(CommandContext& ctx) {
    ctx.load_config(true);
    Panel panel = load_panel(ctx.config);
    Descriptives d = descriptives(panel);
    {
        std::ofstream out(ctx.out_path("descriptives.txt"));
        out << "wave weak.density weak.avgdeg strong.density strong.avgdeg ties.missing "
               "behavior.mean behavior.missing\n";
        for (std::size_t w = 0; w < d.waves.size(); ++w) {
            const auto& row = d.waves[w];
            out << (w + 1) << ' ' << fmt(row.weak_density, "%.4f") << ' '
                << fmt(row.weak_avg_degree, "%.4f") << ' ' << fmt(row.strong_density, "%.4f")
                << ' ' << fmt(row.strong_avg_degree, "%.4f") << ' '
                << fmt(row.tie_missing_fraction, "%.4f") << ' '
                << fmt(row.behavior_mean, "%.4f") << ' '
                << fmt(row.behavior_missing_fraction, "%.4f") << '\n';
        }
        out << "\nperiod weak.jaccard strong.jaccard\n";
        for (std::size_t m = 0; m < d.weak_jaccard.size(); ++m)
            out << (m + 1) << ' ' << fmt(d.weak_jaccard[m], "%.4f") << ' '
                << fmt(d.strong_jaccard[m], "%.4f") << '\n';
    }
    {
        TransitionCounts t = transition_counts(panel);
        std::ofstream out(ctx.out_path("transitions.txt"));
        const char* level_names[3] = {"none", "weak-only", "strong"};
        auto write_block = [&](const TransitionMatrix& m, const std::string& title) {
            out << title << "\n";
            out << "from\\to none weak-only strong\n";
            for (int a = 0; a < 3; ++a) {
                out << level_names[a];
                for (int b = 0; b < 3; ++b) out << ' ' << m[a][b];
                out << '\n';
            }
            out << '\n';
        };
        for (std::size_t m = 0; m < t.per_period.size(); ++m)
            write_block(t.per_period[m], "period " + std::to_string(m + 1));
        write_block(t.pooled, "pooled");
    }
    ctx.write_manifest("describe");
    return 0;
}

int cmd_simulate(CommandContext& ctx, int reps, int periods, int start_wave, bool event_log) {
    ctx.load_config(true);
    Panel panel = load_panel(ctx.config, /*allow_single_wave=*/true);
    ModelSpec model = load_model(ctx.config, panel);
    if (periods < 1) periods = 1;
    ParamLayout layout = ParamLayout::of(model, periods);
    Eigen::VectorXd params = load_parameters(ctx.config, model, layout);
    ChoiceEngine engine = [&] {
        std::array<std::vector<double>, kDependents> theta;
        for (int d = 0; d < kDependents; ++d) {
            theta[d].resize(layout.effect_counts[d]);
            for (int k = 0; k < layout.effect_counts[d]; ++k)
                theta[d][k] = params[layout.effect_index(static_cast<Dependent>(d), k)];
        }
        return ChoiceEngine(model, std::move(theta));
    }();
    if (start_wave < 1 || start_wave > static_cast<int>(panel.waves.size()))
        throw ConfigError("start wave out of range");

    const ImputedPanel imputed = impute_for_simulation(panel);
    const std::uint64_t seed = ctx.seed_value();

    for (int rep = 0; rep < reps; ++rep) {
        const ImputedWave& start = imputed.waves[start_wave - 1];
        ModelState state{start.weak, start.strong, start.behavior, 0.0};
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(rep));
        std::vector<MiniStepRecord> log;
        char stem[64];
        for (int m = 0; m < periods; ++m) {
            Rates rates;
            for (int d = 0; d < kDependents; ++d)
                rates[d] = params[layout.rate_index(static_cast<Dependent>(d), m)];
            state.elapsed = 0.0;
            engine.simulate_period(state, rates, rng, event_log ? &log : nullptr);
            std::snprintf(stem, sizeof(stem), "rep%03d.period%d", rep + 1, m + 1);
            write_matrix_file(ctx.out_path(std::string(stem) + ".weak.txt"), state.weak);
            write_matrix_file(ctx.out_path(std::string(stem) + ".strong.txt"), state.strong);
            write_behavior_file(ctx.out_path(std::string(stem) + ".behavior.txt"),
                                state.behavior);
        }
        if (auto violation = validate_state(state, panel.grid))
            throw NumericalError("simulated state violates invariants: " + violation->what);
        if (event_log) {
            std::snprintf(stem, sizeof(stem), "rep%03d.events.txt", rep + 1);
            std::ofstream out(ctx.out_path(stem));
            out << "time dependent actor target step\n";
            for (const auto& rec : log)
                out << fmt(rec.time, "%.6f") << ' ' << to_string(rec.dependent) << ' '
                    << panel.labels[rec.actor] << ' '
                    << (rec.target >= 0 ? panel.labels[rec.target] : "-") << ' ' << rec.step
                    << '\n';
        }
    }
    ctx.write_manifest("simulate");
    return 0;
}

int cmd_estimate(CommandContext& ctx) {
    ctx.load_config(true);
    Panel panel = load_panel(ctx.config);
    ModelSpec model = load_model(ctx.config, panel);
    EstimationOptions options = load_estimation_options(ctx.config);
    options.seed = ctx.seed_value();
    options.threads = ctx.thread_value();
    EstimationResult result = estimate(panel, model, options);
    write_result_file(ctx.out_path("result.txt"), result);
    write_estimates_table(ctx.out_path("estimates.txt"), result);
    for (const auto& warning : result.warnings) std::cerr << "warning: " << warning << "\n";
    ctx.write_manifest("estimate");
    if (!result.converged) {
        std::cerr << "estimation did not converge (mcr = " << fmt(result.mcr, "%.3f") << ")\n";
        return 4;
    }
    return 0;
}

int cmd_score_test(CommandContext& ctx, const std::string& result_path, const std::string& extra,
                   int runs) {
    ctx.load_config(true);
    Panel panel = load_panel(ctx.config);
    ModelSpec model = load_model(ctx.config, panel);
    EstimationResult fitted = read_result_file(result_path);
    ParamLayout layout = ParamLayout::of(model, panel.periods());
    if (layout.size() != fitted.theta.size())
        throw ConfigError("result file does not match the configured model");

    auto dot = extra.find('.');
    if (dot == std::string::npos)
        throw ConfigError("--extra expects <dependent>.<effect>, e.g. weak.transTrip");
    EffectSpec spec = parse_effect(dependent_from_string(extra.substr(0, dot)),
                                   extra.substr(dot + 1));
    ScoreTestResult r =
        score_test(panel, model, fitted, spec, runs, ctx.seed_value(), ctx.thread_value());
    std::ofstream out(ctx.out_path("score_test.txt"));
    out << "effect = " << spec.qualified() << "\n";
    out << "statistic = " << fmt(r.statistic) << "\n";
    out << "p = " << fmt(r.p_value) << "\n";
    out << "runs = " << r.runs << "\n";
    ctx.write_manifest("score-test");
    return 0;
}

int cmd_wald(CommandContext& ctx, const std::string& result_path, const std::string& params_csv,
             double chi2, int df) {
    std::ofstream out;
    if (!result_path.empty()) {
        EstimationResult fitted = read_result_file(result_path);
        std::vector<int> subset;
        for (const auto& name : split_csv(params_csv)) {
            int idx = find_param(fitted, name);
            if (idx < 0) throw ConfigError("unknown parameter '" + name + "' in result file");
            subset.push_back(idx);
        }
        WaldResult w = wald_test(fitted, subset);
        out.open(ctx.out_path("wald_test.txt"));
        out << "params = " << params_csv << "\n";
        out << "chi2 = " << fmt(w.statistic) << "\n";
        out << "df = " << w.df << "\n";
        out << "p = " << fmt(w.p_value) << "\n";
    } else {
        if (df < 1) throw ConfigError("wald-test needs --result/--params or --chi2/--df");
        out.open(ctx.out_path("wald_test.txt"));
        out << "chi2 = " << fmt(chi2) << "\n";
        out << "df = " << df << "\n";
        out << "p = " << fmt(chi_squared_p_value(chi2, df)) << "\n";
    }
    ctx.write_manifest("wald-test");
    return 0;
}

int cmd_gof(CommandContext& ctx, const std::string& result_path, const std::string& families_csv,
            int runs) {
    ctx.load_config(true);
    Panel panel = load_panel(ctx.config);
    ModelSpec model = load_model(ctx.config, panel);
    EstimationResult fitted = read_result_file(result_path);
    ParamLayout layout = ParamLayout::of(model, panel.periods());
    if (layout.size() != fitted.theta.size())
        throw ConfigError("result file does not match the configured model");

    std::vector<AuxStatistic> families;
    if (families_csv.empty()) {
        families = {AuxStatistic::WeakIndegree, AuxStatistic::WeakOutdegree,
                    AuxStatistic::StrongIndegree, AuxStatistic::StrongOutdegree,
                    AuxStatistic::Behavior};
    } else {
        for (const auto& name : split_csv(families_csv)) families.push_back(aux_from_string(name));
    }
    GofResult g = gof(panel, model, fitted, families, runs, ctx.seed_value(), ctx.thread_value());
    std::ofstream out(ctx.out_path("gof.txt"));
    out << "family period distance p\n";
    for (const auto& entry : g.entries)
        out << to_string(entry.family) << ' ' << (entry.period + 1) << ' '
            << fmt(entry.distance, "%.6f") << ' ' << fmt(entry.p_value, "%.6f") << '\n';
    ctx.write_manifest("gof");
    return 0;
}

int cmd_table(CommandContext& ctx, const std::string& result_path, double ego, double alter,
              double sim, double zbar, double range, double simhat, const std::string& levels_arg,
              bool have_theta) {
    ctx.load_config(false);
    int lo = 1, hi = 13;
    if (!result_path.empty()) {
        EstimationResult fitted = read_result_file(result_path);
        const int ego_idx = find_param_prefix(fitted, "strong.egoX(");
        const int alt_idx = find_param_prefix(fitted, "strong.altX(");
        const int sim_idx = find_param_prefix(fitted, "strong.simX(");
        if (ego_idx < 0 || alt_idx < 0 || sim_idx < 0)
            throw ConfigError("result file has no strong-network ego/alter/similarity "
                              "effects on the behavior; pass --ego/--alter/--sim instead");
        ego = fitted.theta[ego_idx];
        alter = fitted.theta[alt_idx];
        sim = fitted.theta[sim_idx];
        zbar = fitted.zbar;
        range = fitted.z_range;
        simhat = fitted.z_sim_mean;
        hi = fitted.grid;
    } else if (!have_theta) {
        throw ConfigError("table needs either --result or --ego/--alter/--sim with constants");
    }
    if (!levels_arg.empty()) {
        auto dash = levels_arg.find('-');
        if (dash == std::string::npos)
            throw ConfigError("--levels expects <lo>-<hi>, e.g. 3-13");
        lo = std::stoi(levels_arg.substr(0, dash));
        hi = std::stoi(levels_arg.substr(dash + 1));
        if (lo > hi) throw ConfigError("--levels range is empty");
    }
    std::vector<int> levels;
    for (int z = lo; z <= hi; ++z) levels.push_back(z);
    SelectionTable t = selection_table(ego, alter, sim, zbar, range, simhat, levels);
    std::ofstream out(ctx.out_path("selection_table.txt"));
    out << "# gain for ego (rows, z_i) nominating alter (columns, z_j)\n";
    out << "# theta_ego=" << fmt(ego) << " theta_alter=" << fmt(alter) << " theta_sim="
        << fmt(sim) << " zbar=" << fmt(zbar) << " range=" << fmt(range) << " simhat="
        << fmt(simhat) << "\n";
    out << "zi\\zj";
    for (int z : levels) out << ' ' << z;
    out << '\n';
    for (std::size_t r = 0; r < levels.size(); ++r) {
        out << levels[r];
        for (std::size_t c = 0; c < levels.size(); ++c) out << ' ' << fmt(t.gain[r][c], "%.4f");
        out << '\n';
    }
    ctx.write_manifest("table");
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"osaom - ordered stochastic actor-oriented models"};
    app.set_version_flag("--version", std::string("osaom ") + kVersion);
    app.require_subcommand(1);

    CommandContext ctx;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", ctx.config_path, "run configuration file");
        cmd->add_option("--out", ctx.out_dir, "output directory (default .)");
        cmd->add_option("--seed", [&ctx](const CLI::results_t& rs) {
            ctx.seed = static_cast<std::uint64_t>(std::stoull(rs[0]));
            return true;
        }, "random seed override");
        cmd->add_option("--threads", [&ctx](const CLI::results_t& rs) {
            ctx.threads = std::stoi(rs[0]);
            return true;
        }, "worker thread count (0 = hardware)");
        cmd->add_option("--set", ctx.overrides, "override a config key (key=value)")
            ->take_all();
    };

    auto* describe = app.add_subcommand("describe", "panel descriptives and tie transitions");
    add_common(describe);

    auto* simulate = app.add_subcommand("simulate", "forward-simulate from an observed wave");
    add_common(simulate);
    int reps = 1, periods = 1, start_wave = 1;
    bool event_log = false;
    simulate->add_option("--reps", reps, "replication count");
    simulate->add_option("--periods", periods, "consecutive unit-time periods");
    simulate->add_option("--start-wave", start_wave, "wave to start from (1-based)");
    simulate->add_flag("--event-log", event_log, "write a mini-step log per replication");

    auto* estimate_cmd = app.add_subcommand("estimate", "method-of-moments estimation");
    add_common(estimate_cmd);

    auto* score = app.add_subcommand("score-test", "score-type test for an omitted effect");
    add_common(score);
    std::string result_path, extra_effect;
    int score_runs = 1000;
    score->add_option("--result", result_path, "fitted result file")->required();
    score->add_option("--extra", extra_effect, "effect to test, <dependent>.<effect>")
        ->required();
    score->add_option("--runs", score_runs, "simulation runs");

    auto* wald = app.add_subcommand("wald-test", "multi-parameter Wald test");
    add_common(wald);
    std::string wald_result, wald_params;
    double wald_chi2 = 0.0;
    int wald_df = 0;
    wald->add_option("--result", wald_result, "fitted result file");
    wald->add_option("--params", wald_params, "comma-separated parameter names");
    wald->add_option("--chi2", wald_chi2, "chi-square statistic (calculator mode)");
    wald->add_option("--df", wald_df, "degrees of freedom (calculator mode)");

    auto* gof_cmd = app.add_subcommand("gof", "auxiliary-statistic goodness of fit");
    add_common(gof_cmd);
    std::string gof_result, gof_families;
    int gof_runs = 1000;
    gof_cmd->add_option("--result", gof_result, "fitted result file")->required();
    gof_cmd->add_option("--families", gof_families,
                        "comma-separated auxiliary families (default: all)");
    gof_cmd->add_option("--runs", gof_runs, "simulation runs");

    auto* table = app.add_subcommand("table", "ego-alter selection table");
    add_common(table);
    std::string table_result, levels_arg;
    double ego = 0.0, alter = 0.0, sim = 0.0, zbar = 0.0, range = 0.0, simhat = 0.0;
    bool have_theta = false;
    table->add_option("--result", table_result, "fitted result file");
    auto* ego_opt = table->add_option("--ego", ego, "ego coefficient");
    table->add_option("--alter", alter, "alter coefficient");
    table->add_option("--sim", sim, "similarity coefficient");
    table->add_option("--zbar", zbar, "behavior mean");
    auto* range_opt = table->add_option("--range", range, "behavior range");
    table->add_option("--simhat", simhat, "mean similarity");
    table->add_option("--levels", levels_arg, "level range lo-hi (default full grid)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (describe->parsed()) return cmd_describe(ctx);
        if (simulate->parsed()) return cmd_simulate(ctx, reps, periods, start_wave, event_log);
        if (estimate_cmd->parsed()) return cmd_estimate(ctx);
        if (score->parsed()) return cmd_score_test(ctx, result_path, extra_effect, score_runs);
        if (wald->parsed()) return cmd_wald(ctx, wald_result, wald_params, wald_chi2, wald_df);
        if (gof_cmd->parsed()) return cmd_gof(ctx, gof_result, gof_families, gof_runs);
        if (table->parsed()) {
            have_theta = ego_opt->count() > 0;
            if (have_theta && range_opt->count() == 0)
                throw ConfigError("table with explicit coefficients also needs --zbar, "
                                  "--range, and --simhat");
            return cmd_table(ctx, table_result, ego, alter, sim, zbar, range, simhat, levels_arg,
                             have_theta);
        }
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace osaom
