// Acceptance suite: every release-gating check in one binary, one line of
// output per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "corrconv/classifier.hpp"
#include "corrconv/convolution.hpp"
#include "corrconv/csv.hpp"
#include "corrconv/experiments.hpp"
#include "corrconv/model.hpp"
#include "corrconv/oracle.hpp"
#include "corrconv/spectral.hpp"

using namespace corrconv;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

unsigned worker_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : std::min(hw, 4u);
}

std::string out_dir() {
    return (std::filesystem::temp_directory_path() / "corrconv_acceptance").string();
}

CsvTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_csv(in);
}

double median(std::vector<double> values) {
    if (values.empty()) return std::nan("");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

ExperimentConfig sweep_config(ExperimentType type, std::size_t n, double p, double q, double sigma,
                              std::size_t k_max, std::size_t trials,
                              std::vector<OperatorKind> kinds, std::uint64_t seed) {
    ExperimentConfig config;
    config.experiment = type;
    config.n = {n};
    config.p = {p};
    config.q = {q};
    config.sigma = {sigma};
    config.k_max = k_max;
    config.trials = trials;
    config.kinds = std::move(kinds);
    config.master_seed = seed;
    return config;
}

// ---------------------------------------------------------------- criterion 1
Outcome dense_oracle_equivalence() {
    const OperatorKind kinds[] = {OperatorKind::CorrectedUnnormalized,
                                  OperatorKind::CorrectedNormalized, OperatorKind::VanillaRW,
                                  OperatorKind::VanillaSym, OperatorKind::VanillaAvg};
    double worst = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
        const std::size_t n = std::vector<std::size_t>{16, 32, 64}[i % 3];
        ModelParams params;
        params.n = n;
        params.p = 0.8;
        params.q = 0.4;
        const Partition part = sample_partition(n, i % 2 == 1, derive_seed(9100, i));
        const SparseGraph g = sample_graph(params, part, derive_seed(9200, i));
        const Vec x = random_unit_vector(n, derive_seed(9300, i));
        for (OperatorKind kind : kinds) {
            const ConvOperator op(g, kind);
            const DenseMatrix dense = dense_operator(g, kind);
            DenseMatrix power(n);
            for (std::size_t d = 0; d < n; ++d) power.at(d, d) = 1.0;
            for (std::size_t k = 0; k <= 8; ++k) {
                if (k > 0) power = power.matmul(dense);
                const Vec oracle = power.matvec(x);
                const Vec sparse = op.apply_k(x, k);
                const double scale = std::max(norm_inf(oracle), 1e-30);
                for (std::size_t v = 0; v < n; ++v)
                    worst = std::max(worst, std::abs(sparse[v] - oracle[v]) / scale);
            }
        }
    }
    return {worst <= 1e-10, "max entrywise relative deviation " + fmt(worst) +
                                " over 100 instances, 5 kinds, k<=8"};
}

// ---------------------------------------------------------------- criterion 2
Outcome reduction_correctness() {
    const std::size_t n = 1000;
    ModelParams params;
    params.n = n;
    params.p = 0.5;
    params.q = 0.5;
    params.m = 2;
    params.mu = {1.0, 0.5};
    params.nu = {-0.3, -0.2};
    const Partition part = sample_partition(n);
    const Vec s = signal_vector(part);

    params.sigma = 0.0;
    const auto noiseless = reduce_to_1d(sample_features(params, part, 1), params);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(noiseless.x[i] - s[i]));
    if (worst > 1e-12) return {false, "sigma=0 deviation " + fmt(worst) + " above 1e-12"};

    params.sigma = 0.8;
    double diff_sq = 0.0;
    for (std::size_t c = 0; c < params.m; ++c) {
        const double d = params.mu[c] - params.nu[c];
        diff_sq += d * d;
    }
    const double predicted =
        2.0 * params.sigma / (std::sqrt(static_cast<double>(n)) * std::sqrt(diff_sq));
    double acc = 0.0;
    const std::size_t trials = 20;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto reduced = reduce_to_1d(sample_features(params, part, derive_seed(9400, t)), params);
        for (std::size_t i = 0; i < n; ++i) {
            const double dev = reduced.x[i] - s[i];
            acc += dev * dev;
        }
    }
    const double pooled = std::sqrt(acc / static_cast<double>(trials * n));
    const bool pass = std::abs(pooled - predicted) <= 0.10 * predicted;
    return {pass, "sigma=0 exact; empirical noise std " + fmt(pooled) + " vs predicted " +
                      fmt(predicted)};
}

// ------------------------------------------------------- criteria 3 and 4 run
std::string concentration_csv_path;

void run_concentration_once() {
    if (!concentration_csv_path.empty()) return;
    ExperimentConfig config;
    config.experiment = ExperimentType::Concentration;
    config.n = {500, 1000, 2000, 4000};
    config.p = {0.1};
    config.q = {0.02};
    config.sigma = {0.0};
    config.k_max = 0;
    config.trials = 50;
    config.kinds = {OperatorKind::CorrectedUnnormalized, OperatorKind::CorrectedNormalized};
    config.master_seed = 424242;
    concentration_csv_path = run_experiment(config, out_dir(), worker_threads());
}

Outcome concentration_suite() {
    run_concentration_once();
    const CsvTable table = load_csv(concentration_csv_path);
    const std::size_t col_n = table.column("n"), col_kind = table.column("kind"),
                      col_eta = table.column("eta"), col_r = table.column("r_norm"),
                      col_delta = table.column("delta"), col_status = table.column("status"),
                      col_p = table.column("p");
    const double gamma = (0.1 - 0.02) / (0.1 + 0.02);

    std::size_t eta_hits = 0, eta_total = 0;
    std::map<std::string, std::vector<double>> r_scaled, delta_scaled;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r][col_status] != "ok") return {false, "failed trial row in concentration run"};
        if (table.rows[r][col_kind] != kind_name(OperatorKind::CorrectedUnnormalized)) continue;
        const double n = csv_number(table, r, col_n);
        const double root_np = std::sqrt(n * csv_number(table, r, col_p));
        ++eta_total;
        if (std::abs(csv_number(table, r, col_eta) - gamma) <= 0.05 * gamma) ++eta_hits;
        r_scaled[table.rows[r][col_n]].push_back(csv_number(table, r, col_r) / root_np);
        delta_scaled[table.rows[r][col_n]].push_back(csv_number(table, r, col_delta) * root_np);
    }
    if (eta_total != 200) return {false, "expected 200 corrected_unnormalized rows"};

    const bool eta_ok = eta_hits >= static_cast<std::size_t>(0.95 * static_cast<double>(eta_total));
    double r_median_min = 1e300, r_median_max = 0.0, delta_min = 1e300, delta_max = 0.0;
    bool r_bound_ok = true;
    std::string detail;
    for (auto& [n_label, values] : r_scaled) {
        const double med = median(values);
        r_bound_ok = r_bound_ok && med <= 4.0;
        r_median_min = std::min(r_median_min, med);
        r_median_max = std::max(r_median_max, med);
    }
    for (auto& [n_label, values] : delta_scaled) {
        const double med = median(values);
        delta_min = std::min(delta_min, med);
        delta_max = std::max(delta_max, med);
    }
    const bool r_flat = r_median_max < 2.0 * r_median_min;
    const bool delta_flat = delta_max < 2.0 * delta_min;
    detail = "eta in gamma(1+-0.05): " + std::to_string(eta_hits) + "/" + std::to_string(eta_total) +
             "; median |R|/sqrt(np) in [" + fmt(r_median_min) + "," + fmt(r_median_max) +
             "]; median delta*sqrt(np) in [" + fmt(delta_min) + "," + fmt(delta_max) + "]";
    return {eta_ok && r_bound_ok && r_flat && delta_flat, detail};
}

Outcome eigenvector_correlation_bound() {
    run_concentration_once();
    const CsvTable table = load_csv(concentration_csv_path);
    const std::size_t col_gamma = table.column("gamma"), col_delta = table.column("delta"),
                      col_corr = table.column("s_hat_corr"), col_status = table.column("status");
    std::size_t qualifying = 0, hits = 0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r][col_status] != "ok") continue;
        const double gamma = std::abs(csv_number(table, r, col_gamma));
        const double delta = csv_number(table, r, col_delta);
        if (gamma <= 8.0 * delta) continue;
        ++qualifying;
        const double ratio = delta / gamma;
        if (csv_number(table, r, col_corr) >= 1.0 - 4.0 * ratio * ratio) ++hits;
    }
    const bool pass =
        qualifying == 0 || hits >= static_cast<std::size_t>(0.95 * static_cast<double>(qualifying));
    std::string detail = std::to_string(hits) + "/" + std::to_string(qualifying) +
                         " qualifying rows satisfy the correlation bound";
    if (qualifying == 0)
        detail = "no rows with gamma > 8*delta in this regime; vacuously satisfied";
    return {pass, detail};
}

// ---------------------------------------------------------------- criterion 5
Outcome partial_recovery_decay() {
    const auto config =
        sweep_config(ExperimentType::PartialSweep, 2000, 0.1, 0.02, 1.0, 5, 50,
                     {OperatorKind::CorrectedUnnormalized}, 515151);
    const std::string path = run_experiment(config, out_dir(), worker_threads());
    const CsvTable table = load_csv(path);
    const std::size_t col_k = table.column("k"), col_err = table.column("error_rate"),
                      col_status = table.column("status");
    std::map<std::size_t, std::vector<double>> by_k;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r][col_status] != "ok") return {false, "failed trial row"};
        by_k[static_cast<std::size_t>(csv_number(table, r, col_k))].push_back(
            csv_number(table, r, col_err));
    }
    std::vector<double> medians;
    for (std::size_t k = 0; k <= 5; ++k) medians.push_back(median(by_k.at(k)));
    bool monotone = true;
    for (std::size_t k = 0; k + 1 <= 5; ++k)
        monotone = monotone && medians[k + 1] <= medians[k] + 0.02;
    const bool decayed = medians[5] <= 0.1 * medians[0];
    std::string detail = "median error by k:";
    for (double m : medians) detail += " " + fmt(m);
    return {monotone && decayed, detail};
}

// ---------------------------------------------------------------- criterion 6
Outcome oversmoothing_contrast() {
    const auto config = sweep_config(
        ExperimentType::Oversmoothing, 2000, 0.1, 0.02, 1.0, 40, 50,
        {OperatorKind::CorrectedUnnormalized, OperatorKind::VanillaRW}, 616161);
    const std::string path = run_experiment(config, out_dir(), worker_threads());
    const CsvTable table = load_csv(path);
    const std::size_t col_k = table.column("k"), col_err = table.column("error_rate"),
                      col_kind = table.column("kind"), col_status = table.column("status");
    std::vector<double> corrected, vanilla;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r][col_status] != "ok") return {false, "failed trial row"};
        if (table.rows[r][col_k] != "40") continue;
        if (table.rows[r][col_kind] == kind_name(OperatorKind::CorrectedUnnormalized))
            corrected.push_back(csv_number(table, r, col_err));
        else
            vanilla.push_back(csv_number(table, r, col_err));
    }
    const double med_corrected = median(corrected), med_vanilla = median(vanilla);
    return {med_corrected <= 0.1 && med_vanilla >= 0.35,
            "k=40 median error: corrected " + fmt(med_corrected) + ", vanilla_rw " +
                fmt(med_vanilla)};
}

// ---------------------------------------------------------------- criterion 7
Outcome exact_recovery() {
    const auto config = sweep_config(ExperimentType::ExactSweep, 2000, 0.25, 0.05, 0.05, 3, 50,
                                     {OperatorKind::CorrectedUnnormalized}, 717171);
    const std::string path = run_experiment(config, out_dir(), worker_threads());
    const CsvTable table = load_csv(path);
    const std::size_t col_k = table.column("k"), col_exact = table.column("exact"),
                      col_inf = table.column("infinity_error"), col_status = table.column("status");
    std::size_t exact_hits = 0, total = 0;
    bool inf_ok = true;
    double worst_inf = 0.0;
    const double threshold = 1.0 / std::sqrt(2000.0);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r][col_status] != "ok") return {false, "failed trial row"};
        if (table.rows[r][col_k] != "3") continue;
        ++total;
        if (table.rows[r][col_exact] == "1") {
            ++exact_hits;
            const double inf = csv_number(table, r, col_inf);
            worst_inf = std::max(worst_inf, inf);
            inf_ok = inf_ok && inf < threshold;
        }
    }
    const double rate = static_cast<double>(exact_hits) / static_cast<double>(total);
    return {rate >= 0.9 && inf_ok, "exact rate " + fmt(rate) + " at k=3; worst infinity error " +
                                       fmt(worst_inf) + " vs 1/sqrt(n) " + fmt(threshold)};
}

// ---------------------------------------------------------------- criterion 8
Outcome mse_bound_chain() {
    const std::size_t n = 64;
    const Partition truth = sample_partition(n, true, 5);
    const Vec s = signal_vector(truth);
    Xoshiro256pp rng(88);
    double slack = 1e300;
    for (std::size_t rep = 0; rep < 1000; ++rep) {
        Vec x(n);
        const double spread = rep % 3 == 0 ? 0.05 : (rep % 3 == 1 ? 1.0 : 10.0);
        for (std::size_t i = 0; i < n; ++i) x[i] = s[i] + spread * rng.gaussian();
        if (rep % 7 == 0) scale_inplace(x, -2.0);
        const double bound = mse_error_bound(x, s);
        const double actual = static_cast<double>(score(classify(x), truth).misclassified);
        if (actual > bound) return {false, "bound violated: " + fmt(actual) + " > " + fmt(bound)};
        slack = std::min(slack, bound - actual);
    }
    return {true, "bound held for 1000 random vectors at n=64 (min slack " + fmt(slack) + ")"};
}

// ---------------------------------------------------------------- criterion 9
Outcome walk_count_audit() {
    std::string detail;
    for (const auto& [n, k, t] : std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>{
             {4, 2, 2}, {3, 2, 2}}) {
        const WalkCountTable table = count_valid_walk_tuples(n, k, t, 0);
        if (table.counts.empty()) return {false, "no valid tuples found"};
        for (const auto& [ell, count] : table.counts) {
            if (ell > t * k)
                return {false, "nonzero count above the pigeonhole cap at ell=" + std::to_string(ell)};
            if (static_cast<long double>(count) > table.bounds.at(ell))
                return {false, "count exceeds bound at ell=" + std::to_string(ell)};
        }
        detail += "(n=" + std::to_string(n) + ": " + std::to_string(table.counts.size()) +
                  " occupied levels ok) ";
    }
    return {true, detail + "all counts within the closed-form bound"};
}

// --------------------------------------------------------------- criterion 10
Outcome message_passing_tail() {
    ModelParams params;
    params.n = 128;
    params.p = 0.3;
    params.q = 0.1;
    const Partition part = sample_partition(params.n);
    const double ex1 = tail_check(params, part, 0, 1, 2000, 8.0, 1010);
    const double ex2 = tail_check(params, part, 0, 2, 2000, 8.0, 2020);
    return {ex1 <= 0.05 && ex2 <= 0.05,
            "exceedance ell=1: " + fmt(ex1) + ", ell=2: " + fmt(ex2) + " (C=8, 2000 trials)"};
}

// --------------------------------------------------------------- criterion 11
std::string strip_wall_time(const std::string& csv) {
    std::stringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        out += line.substr(0, line.rfind(','));
        out += '\n';
    }
    return out;
}

Outcome determinism() {
    const auto config =
        sweep_config(ExperimentType::PartialSweep, 200, 0.5, 0.1, 0.5, 3, 3,
                     {OperatorKind::CorrectedUnnormalized, OperatorKind::VanillaRW}, 111111);
    std::stringstream a, b, c;
    run_classification_sweep(config, a, 1);
    run_classification_sweep(config, b, worker_threads());
    run_classification_sweep(config, c, 2);
    const std::string sa = strip_wall_time(a.str());
    const bool pass = sa == strip_wall_time(b.str()) && sa == strip_wall_time(c.str());
    return {pass, pass ? "rerun and thread-count variations byte-identical (sans timing column)"
                       : "outputs differ across reruns"};
}

} // namespace

int main() {
    struct Entry {
        int id;
        const char* title;
        double budget_seconds; // 0 = no stated budget
        std::function<Outcome()> fn;
    };
    const std::vector<Entry> criteria = {
        {1, "dense-oracle equivalence", 30, dense_oracle_equivalence},
        {2, "1-D reduction correctness", 10, reduction_correctness},
        {3, "concentration suite", 300, concentration_suite},
        {4, "eigenvector correlation bound", 0, eigenvector_correlation_bound},
        {5, "partial-recovery decay", 120, partial_recovery_decay},
        {6, "oversmoothing contrast", 180, oversmoothing_contrast},
        {7, "exact recovery", 120, exact_recovery},
        {8, "MSE bound chain", 5, mse_bound_chain},
        {9, "walk-count audit", 30, walk_count_audit},
        {10, "message-passing tail", 120, message_passing_tail},
        {11, "determinism", 0, determinism},
    };

    std::filesystem::create_directories(out_dir());
    int passed = 0;
    // criterion 3's sweep dominates the wall-clock; time it inside its own entry
    for (const auto& entry : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = entry.fn();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool in_budget = entry.budget_seconds <= 0.0 || seconds < entry.budget_seconds;
        // criterion 4 reuses criterion 3's cached run, so its own time is parsing only
        const bool pass = outcome.pass && in_budget;
        if (pass) ++passed;
        std::printf("[%s] criterion %2d: %s — %s (%.1f s%s)\n", pass ? "PASS" : "FAIL", entry.id,
                    entry.title, outcome.detail.c_str(), seconds,
                    in_budget ? "" : ", over budget");
    }
    std::printf("acceptance: %d/%zu criteria passed\n", passed, criteria.size());
    return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
