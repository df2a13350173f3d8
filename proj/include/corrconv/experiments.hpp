#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "corrconv/classifier.hpp"
#include "corrconv/convolution.hpp"
#include "corrconv/csv.hpp"
#include "corrconv/model.hpp"
#include "corrconv/oracle.hpp"
#include "corrconv/rng.hpp"
#include "corrconv/spectral.hpp"

namespace corrconv {

enum class ExperimentType { PartialSweep, Oversmoothing, ExactSweep, Concentration, WalkAudit };

inline const char* experiment_name(ExperimentType type) {
    switch (type) {
        case ExperimentType::PartialSweep: return "partial_sweep";
        case ExperimentType::Oversmoothing: return "oversmoothing";
        case ExperimentType::ExactSweep: return "exact_sweep";
        case ExperimentType::Concentration: return "concentration";
        case ExperimentType::WalkAudit: return "walk_audit";
    }
    throw std::logic_error("experiment_name: unknown type");
}

inline ExperimentType experiment_from_name(const std::string& name) {
    if (name == "partial_sweep") return ExperimentType::PartialSweep;
    if (name == "oversmoothing") return ExperimentType::Oversmoothing;
    if (name == "exact_sweep") return ExperimentType::ExactSweep;
    if (name == "concentration") return ExperimentType::Concentration;
    if (name == "walk_audit") return ExperimentType::WalkAudit;
    throw std::invalid_argument("unknown experiment: " + name);
}

/// Experiment description. Swept fields (n, p, q, sigma) are lists; the run
/// covers their cartesian product in nested order n > p > q > sigma.
///
/// sigma is the 1-D noise level sigma' applied directly to the signal when mu
/// and nu are absent; when both are given the full m-dimensional pipeline runs
/// (feature sampling followed by the 1-D reduction) and sigma is the feature
/// noise. For walk_audit, k_max is the walk length k and trials is the tuple
/// half-count t.
struct ExperimentConfig {
    ExperimentType experiment = ExperimentType::PartialSweep;
    std::vector<std::size_t> n;
    std::vector<double> p;
    std::vector<double> q;
    std::vector<double> sigma;
    std::size_t m = 1;
    std::vector<double> mu;
    std::vector<double> nu;
    std::size_t k_max = 0;
    std::size_t trials = 1;
    std::vector<OperatorKind> kinds;
    std::uint64_t master_seed = 0;

    bool uses_feature_pipeline() const { return !mu.empty() || !nu.empty(); }

    void validate() const {
        if (n.empty() || p.empty() || q.empty() || sigma.empty())
            throw std::invalid_argument("config: swept ranges must be nonempty");
        if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
        if (experiment != ExperimentType::WalkAudit) // walk audit does not sample a model
            for (std::size_t nn : n)
                if (nn < 2 || nn % 2 != 0)
                    throw std::invalid_argument("config: n must be even and >= 2");
        if (uses_feature_pipeline()) {
            if (mu.size() != m || nu.size() != m)
                throw std::invalid_argument("config: mu and nu must both have dimension m");
        }
        if (experiment == ExperimentType::WalkAudit) return;
        if (kinds.empty()) throw std::invalid_argument("config: kinds must be nonempty");
        if (experiment == ExperimentType::Oversmoothing) {
            bool corrected = false, vanilla = false;
            for (OperatorKind kind : kinds) {
                if (kind == OperatorKind::CorrectedUnnormalized ||
                    kind == OperatorKind::CorrectedNormalized)
                    corrected = true;
                else
                    vanilla = true;
            }
            if (!corrected || !vanilla)
                throw std::invalid_argument(
                    "config: oversmoothing needs at least one corrected and one vanilla kind");
        }
        if (experiment == ExperimentType::Concentration)
            for (OperatorKind kind : kinds)
                if (!kind_is_symmetric(kind))
                    throw std::invalid_argument("config: concentration kinds must be symmetric");
    }
};

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    static const std::vector<std::string> allowed = {"experiment", "n",      "p",     "q",
                                                     "sigma",      "m",      "mu",    "nu",
                                                     "k_max",      "trials", "kinds", "master_seed"};
    for (const auto& item : j.items()) {
        bool known = false;
        for (const auto& key : allowed) known = known || key == item.key();
        if (!known) throw std::invalid_argument("config: unknown key '" + item.key() + "'");
    }
    auto require = [&](const char* key) -> const nlohmann::json& {
        if (!j.contains(key)) throw std::invalid_argument(std::string("config: missing key '") + key + "'");
        return j.at(key);
    };
    auto number_list = [](const nlohmann::json& v) {
        std::vector<double> out;
        if (v.is_array())
            for (const auto& x : v) out.push_back(x.get<double>());
        else
            out.push_back(v.get<double>());
        return out;
    };

    ExperimentConfig config;
    config.experiment = experiment_from_name(require("experiment").get<std::string>());
    for (double v : number_list(require("n"))) {
        if (v < 0 || v != std::floor(v)) throw std::invalid_argument("config: n must be a positive integer");
        config.n.push_back(static_cast<std::size_t>(v));
    }
    config.p = number_list(require("p"));
    config.q = number_list(require("q"));
    config.sigma = number_list(require("sigma"));
    if (j.contains("m")) config.m = j.at("m").get<std::size_t>();
    if (j.contains("mu")) config.mu = j.at("mu").get<std::vector<double>>();
    if (j.contains("nu")) config.nu = j.at("nu").get<std::vector<double>>();
    config.k_max = require("k_max").get<std::size_t>();
    config.trials = require("trials").get<std::size_t>();
    for (const auto& name : require("kinds"))
        config.kinds.push_back(kind_from_name(name.get<std::string>()));
    config.master_seed = require("master_seed").get<std::uint64_t>();
    config.validate();
    return config;
}

inline ExperimentConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return config_from_json(j);
}

// Documented CSV schemas. wall_time_ms is always last and is the one column
// excluded from determinism comparisons.
inline constexpr const char* kSweepCsvHeader =
    "experiment,trial,n,p,q,sigma,gamma,kind,k,misclassified,error_rate,exact,eta,delta,lambda1,"
    "s_hat_corr,infinity_error,status,wall_time_ms";
inline constexpr const char* kConcentrationCsvHeader =
    "experiment,trial,n,p,q,sigma,gamma,kind,d,eta,d_prime,r_norm,delta,lambda1,lambda2,"
    "s_hat_corr,status,wall_time_ms";
inline constexpr const char* kWalkAuditCsvHeader = "experiment,n,k,t,u,ell,count,bound";

/// One CSV row of a sweep run: one (trial, k, kind) observation.
struct TrialRecord {
    std::string experiment;
    std::size_t trial = 0;
    std::size_t n = 0;
    double p = 0.0, q = 0.0, sigma = 0.0, gamma = 0.0;
    std::string kind;
    std::size_t k = 0;
    double misclassified = 0.0;
    double error_rate = 0.0;
    bool exact = false;
    double eta = 0.0;
    double delta = std::nan("");
    double lambda1 = std::nan("");
    double s_hat_corr = std::nan("");
    double infinity_error = std::nan("");
    std::string status = "ok";
    double wall_time_ms = 0.0;

    void append_csv(std::string& out) const {
        out += experiment;
        out += ',';
        out += std::to_string(trial);
        out += ',';
        out += std::to_string(n);
        out += ',';
        out += fmt_double(p);
        out += ',';
        out += fmt_double(q);
        out += ',';
        out += fmt_double(sigma);
        out += ',';
        out += fmt_double(gamma);
        out += ',';
        out += kind;
        out += ',';
        out += std::to_string(k);
        out += ',';
        out += fmt_double(misclassified);
        out += ',';
        out += fmt_double(error_rate);
        out += ',';
        out += exact ? "1" : "0";
        out += ',';
        out += fmt_double(eta);
        out += ',';
        out += fmt_double(delta);
        out += ',';
        out += fmt_double(lambda1);
        out += ',';
        out += fmt_double(s_hat_corr);
        out += ',';
        out += fmt_double(infinity_error);
        out += ',';
        out += status;
        out += ',';
        out += fmt_double(wall_time_ms);
        out += '\n';
    }
};

namespace detail {

/// Runs `task` for indices [0, task_count) on `threads` workers and streams
/// the string results to `out` in index order.
inline void run_ordered_tasks(std::size_t task_count, unsigned threads,
                              const std::function<std::string(std::size_t)>& task,
                              std::ostream& out) {
    if (threads <= 1 || task_count <= 1) {
        for (std::size_t i = 0; i < task_count; ++i) out << task(i);
        return;
    }
    std::vector<std::string> results(task_count);
    std::vector<char> done(task_count, 0);
    std::mutex mutex;
    std::size_t next_write = 0;
    std::atomic<std::size_t> next_task{0};
    std::exception_ptr failure;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next_task.fetch_add(1);
            if (i >= task_count) return;
            std::string buffer;
            try {
                buffer = task(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mutex);
                if (!failure) failure = std::current_exception();
                done[i] = 1;
                continue;
            }
            std::lock_guard<std::mutex> lock(mutex);
            results[i] = std::move(buffer);
            done[i] = 1;
            while (next_write < task_count && done[next_write]) {
                out << results[next_write];
                results[next_write].clear();
                ++next_write;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct Combo {
    std::size_t n;
    double p, q, sigma;
};

inline std::vector<Combo> combos_of(const ExperimentConfig& config) {
    std::vector<Combo> combos;
    for (std::size_t n : config.n)
        for (double p : config.p)
            for (double q : config.q)
                for (double sigma : config.sigma) combos.push_back({n, p, q, sigma});
    return combos;
}

inline ModelParams params_for(const ExperimentConfig& config, const Combo& combo) {
    ModelParams params;
    params.n = combo.n;
    params.p = combo.p;
    params.q = combo.q;
    if (config.uses_feature_pipeline()) {
        params.m = config.m;
        params.mu = config.mu;
        params.nu = config.nu;
        params.sigma = combo.sigma;
    } else {
        params.m = 1;
        params.sigma = 0.0; // sigma acts as sigma' on the reduced features
    }
    return params;
}

inline double safe_gamma(double p, double q) {
    return p + q > 0.0 ? (p - q) / (p + q) : std::nan("");
}

/// Sampled input for one trial: graph, truth, and reduced 1-D features.
struct TrialDraw {
    Partition partition;
    SparseGraph graph;
    Vec s;
    Vec x0;
};

inline TrialDraw draw_trial(const ExperimentConfig& config, const Combo& combo,
                            std::uint64_t trial_seed) {
    const ModelParams params = params_for(config, combo);
    TrialDraw draw;
    draw.partition = sample_partition(combo.n);
    draw.graph = sample_graph(params, draw.partition, derive_seed(trial_seed, 0));
    draw.s = signal_vector(draw.partition);
    if (config.uses_feature_pipeline()) {
        const FeatureMatrix X = sample_features(params, draw.partition, derive_seed(trial_seed, 1));
        draw.x0 = reduce_to_1d(X, params).x;
    } else {
        Xoshiro256pp rng(derive_seed(trial_seed, 1));
        draw.x0.resize(combo.n);
        for (std::size_t i = 0; i < combo.n; ++i)
            draw.x0[i] = draw.s[i] + combo.sigma * rng.gaussian();
    }
    return draw;
}

} // namespace detail

/// Shared driver for the three classification sweeps. Per (combo, trial):
/// sample once, then convolve k = 0..k_max under every configured kind on the
/// shared draw. Failed operator builds become failed rows, not aborts.
inline void run_classification_sweep(const ExperimentConfig& config, std::ostream& out,
                                     unsigned threads = 1) {
    config.validate();
    const auto combos = detail::combos_of(config);
    const std::string name = experiment_name(config.experiment);
    out << kSweepCsvHeader << '\n';

    auto task = [&](std::size_t index) {
        const std::size_t combo_index = index / config.trials;
        const std::size_t trial = index % config.trials;
        const detail::Combo combo = combos[combo_index];
        const std::uint64_t trial_seed = derive_seed(config.master_seed, index);

        std::string rows;
        TrialRecord base;
        base.experiment = name;
        base.trial = trial;
        base.n = combo.n;
        base.p = combo.p;
        base.q = combo.q;
        base.sigma = combo.sigma;
        base.gamma = detail::safe_gamma(combo.p, combo.q);

        detail::TrialDraw draw;
        std::string draw_failure;
        try {
            draw = detail::draw_trial(config, combo, trial_seed);
        } catch (const std::exception& e) {
            draw_failure = e.what();
        }

        for (OperatorKind kind : config.kinds) {
            const auto started = std::chrono::steady_clock::now();
            TrialRecord record = base;
            record.kind = kind_name(kind);
            std::string failure = draw_failure.empty() ? "" : "draw_failed";
            double abs_eta = std::nan("");

            if (failure.empty()) {
                try {
                    const int sign = combo.q > combo.p ? -1 : 1;
                    const ConvOperator op(draw.graph, kind, sign);
                    const ModelParams params = detail::params_for(config, combo);
                    const DegreeStats stats = degree_stats(draw.graph, params);
                    record.eta = stats.eta;
                    abs_eta = std::abs(stats.eta);
                    Vec y = draw.x0;
                    for (std::size_t k = 0; k <= config.k_max; ++k) {
                        if (k > 0) y = op.apply(y);
                        const ClassificationResult result = score(classify(y), draw.partition);
                        record.k = k;
                        record.misclassified = static_cast<double>(result.misclassified);
                        record.error_rate = result.error_rate;
                        record.exact = result.exact;
                        record.infinity_error = std::nan("");
                        record.status = "ok";
                        if (abs_eta > 0.0) {
                            const double log_scale = static_cast<double>(k) * std::log(abs_eta);
                            if (std::abs(log_scale) <= 600.0) {
                                const double scale = std::exp(-log_scale);
                                double worst = 0.0;
                                for (std::size_t i = 0; i < y.size(); ++i)
                                    worst = std::max(worst, std::abs(y[i] * scale - draw.s[i]));
                                record.infinity_error = worst;
                            } else {
                                record.status = "scale_range";
                            }
                        } else if (config.experiment == ExperimentType::ExactSweep) {
                            record.status = "eta_nonpositive";
                        }
                        record.wall_time_ms =
                            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                      started)
                                .count();
                        record.append_csv(rows);
                    }
                    continue;
                } catch (const std::domain_error&) {
                    failure = "isolated_vertex";
                } catch (const std::exception&) {
                    failure = "trial_failed";
                }
            }
            record.status = failure;
            record.misclassified = std::nan("");
            record.error_rate = std::nan("");
            record.exact = false;
            record.eta = std::nan("");
            for (std::size_t k = 0; k <= config.k_max; ++k) {
                record.k = k;
                record.wall_time_ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
                        .count();
                record.append_csv(rows);
            }
        }
        return rows;
    };

    detail::run_ordered_tasks(combos.size() * config.trials, threads, task, out);
}

inline void run_partial_sweep(const ExperimentConfig& config, std::ostream& out,
                              unsigned threads = 1) {
    if (config.experiment != ExperimentType::PartialSweep)
        throw std::invalid_argument("run_partial_sweep: wrong experiment type");
    run_classification_sweep(config, out, threads);
}

inline void run_oversmoothing(const ExperimentConfig& config, std::ostream& out,
                              unsigned threads = 1) {
    if (config.experiment != ExperimentType::Oversmoothing)
        throw std::invalid_argument("run_oversmoothing: wrong experiment type");
    run_classification_sweep(config, out, threads);
}

inline void run_exact_sweep(const ExperimentConfig& config, std::ostream& out,
                            unsigned threads = 1) {
    if (config.experiment != ExperimentType::ExactSweep)
        throw std::invalid_argument("run_exact_sweep: wrong experiment type");
    run_classification_sweep(config, out, threads);
}

/// Per (trial, kind): the full SpectralReport row. Kinds are measured on the
/// same sampled graph.
inline void run_concentration(const ExperimentConfig& config, std::ostream& out,
                              unsigned threads = 1) {
    if (config.experiment != ExperimentType::Concentration)
        throw std::invalid_argument("run_concentration: wrong experiment type");
    config.validate();
    const auto combos = detail::combos_of(config);
    const std::string name = experiment_name(config.experiment);
    out << kConcentrationCsvHeader << '\n';

    auto task = [&](std::size_t index) {
        const std::size_t combo_index = index / config.trials;
        const std::size_t trial = index % config.trials;
        const detail::Combo combo = combos[combo_index];
        const std::uint64_t trial_seed = derive_seed(config.master_seed, index);
        const ModelParams params = detail::params_for(config, combo);

        std::string rows;
        const std::string prefix = name + ',' + std::to_string(trial) + ',' +
                                   std::to_string(combo.n) + ',' + fmt_double(combo.p) + ',' +
                                   fmt_double(combo.q) + ',' + fmt_double(combo.sigma) + ',' +
                                   fmt_double(detail::safe_gamma(combo.p, combo.q)) + ',';

        Partition partition = sample_partition(combo.n);
        SparseGraph graph;
        std::string draw_failure;
        try {
            graph = sample_graph(params, partition, derive_seed(trial_seed, 0));
        } catch (const std::exception&) {
            draw_failure = "draw_failed";
        }

        std::size_t kind_index = 0;
        for (OperatorKind kind : config.kinds) {
            const auto started = std::chrono::steady_clock::now();
            std::string status = draw_failure;
            SpectralReport report;
            if (status.empty()) {
                try {
                    SpectralOptions opts;
                    opts.seed = derive_seed(trial_seed, 2 + kind_index);
                    report = measure_spectral(graph, params, partition, kind, opts);
                    status = "ok";
                } catch (const std::domain_error&) {
                    status = "isolated_vertex";
                } catch (const ConvergenceError&) {
                    status = "no_convergence";
                } catch (const std::exception&) {
                    status = "trial_failed";
                }
            }
            const double ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
                    .count();
            rows += prefix;
            rows += kind_name(kind);
            rows += ',';
            if (status == "ok") {
                rows += fmt_double(report.d);
                rows += ',';
                rows += fmt_double(report.eta);
                rows += ',';
                rows += fmt_double(report.d_prime);
                rows += ',';
                rows += fmt_double(report.r_norm);
                rows += ',';
                rows += fmt_double(report.delta);
                rows += ',';
                rows += fmt_double(report.lambda1);
                rows += ',';
                rows += fmt_double(report.lambda2);
                rows += ',';
                rows += fmt_double(report.s_hat_corr);
            } else {
                for (int i = 0; i < 8; ++i) rows += i ? ",nan" : "nan";
            }
            rows += ',';
            rows += status;
            rows += ',';
            rows += fmt_double(ms);
            rows += '\n';
            ++kind_index;
        }
        return rows;
    };

    detail::run_ordered_tasks(combos.size() * config.trials, threads, task, out);
}

/// Exhaustive walk-tuple audit rows; k_max plays the walk length and trials
/// the tuple half-count t.
inline void run_walk_audit(const ExperimentConfig& config, std::ostream& out) {
    if (config.experiment != ExperimentType::WalkAudit)
        throw std::invalid_argument("run_walk_audit: wrong experiment type");
    config.validate();
    out << kWalkAuditCsvHeader << '\n';
    for (std::size_t n : config.n) {
        const WalkCountTable table = count_valid_walk_tuples(n, config.k_max, config.trials, 0);
        for (const auto& [ell, count] : table.counts)
            out << experiment_name(config.experiment) << ',' << n << ',' << table.k << ','
                << table.t << ',' << table.u << ',' << ell << ',' << count << ','
                << fmt_double(static_cast<double>(table.bounds.at(ell))) << '\n';
    }
}

/// Runs the configured experiment, writing <out_dir>/<experiment>.csv.
/// Concentration runs additionally write <out_dir>/concentration_summary.csv
/// with per-(n,p,q,kind) quartiles of the scaled concentration statistics.
inline std::string run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                                  unsigned threads = 1) {
    config.validate();
    std::filesystem::create_directories(out_dir);
    const std::string csv_path =
        (std::filesystem::path(out_dir) / (std::string(experiment_name(config.experiment)) + ".csv"))
            .string();
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("run_experiment: cannot open " + csv_path);

    switch (config.experiment) {
        case ExperimentType::PartialSweep:
        case ExperimentType::Oversmoothing:
        case ExperimentType::ExactSweep:
            run_classification_sweep(config, out, threads);
            break;
        case ExperimentType::Concentration:
            run_concentration(config, out, threads);
            break;
        case ExperimentType::WalkAudit:
            run_walk_audit(config, out);
            break;
    }
    out.close();

    if (config.experiment == ExperimentType::Concentration) {
        std::ifstream in(csv_path);
        const CsvTable table = parse_csv(in);
        const std::size_t col_n = table.column("n"), col_p = table.column("p"),
                          col_q = table.column("q"), col_kind = table.column("kind"),
                          col_eta = table.column("eta"), col_r = table.column("r_norm"),
                          col_delta = table.column("delta"), col_corr = table.column("s_hat_corr"),
                          col_status = table.column("status");
        struct Key {
            std::string n, p, q, kind;
            bool operator<(const Key& o) const {
                return std::tie(n, p, q, kind) < std::tie(o.n, o.p, o.q, o.kind);
            }
        };
        std::map<Key, std::vector<std::array<double, 4>>> groups;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            if (table.rows[r][col_status] != "ok") continue;
            const double n = csv_number(table, r, col_n);
            const double np = n * csv_number(table, r, col_p);
            groups[{table.rows[r][col_n], table.rows[r][col_p], table.rows[r][col_q],
                    table.rows[r][col_kind]}]
                .push_back({csv_number(table, r, col_eta),
                            csv_number(table, r, col_r) / std::sqrt(np),
                            csv_number(table, r, col_delta) * std::sqrt(np),
                            csv_number(table, r, col_corr)});
        }
        const std::string summary_path =
            (std::filesystem::path(out_dir) / "concentration_summary.csv").string();
        std::ofstream summary(summary_path, std::ios::binary);
        summary << "n,p,q,kind,metric,q25,median,q75\n";
        const char* metric_names[4] = {"eta", "r_norm_over_sqrt_np", "delta_times_sqrt_np",
                                       "s_hat_corr"};
        auto quantile = [](std::vector<double>& v, double f) {
            std::sort(v.begin(), v.end());
            const double pos = f * static_cast<double>(v.size() - 1);
            const std::size_t lo = static_cast<std::size_t>(pos);
            const std::size_t hi = std::min(lo + 1, v.size() - 1);
            return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
        };
        for (auto& [key, values] : groups) {
            for (int metric = 0; metric < 4; ++metric) {
                std::vector<double> column;
                column.reserve(values.size());
                for (const auto& tuple : values) column.push_back(tuple[metric]);
                summary << key.n << ',' << key.p << ',' << key.q << ',' << key.kind << ','
                        << metric_names[metric] << ',' << fmt_double(quantile(column, 0.25)) << ','
                        << fmt_double(quantile(column, 0.5)) << ','
                        << fmt_double(quantile(column, 0.75)) << '\n';
            }
        }
    }
    return csv_path;
}

} // namespace corrconv
