#include <aibo/harness.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace aibo {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view token, const std::string& context) {
    double value = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw std::runtime_error("bad numeric field '" + std::string(token) + "' in " + context);
    }
    return value;
}

long parse_long(std::string_view token, const std::string& context) {
    long value = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw std::runtime_error("bad integer field '" + std::string(token) + "' in " + context);
    }
    return value;
}

const char* kTraceHeader =
    "run_seed,iteration,eval_index,strategy,af_value,y_raw,best_so_far,"
    "wins_af_cmaes,wins_af_ga,wins_af_random,"
    "wins_mean_cmaes,wins_mean_ga,wins_mean_random,"
    "wins_var_cmaes,wins_var_ga,wins_var_random";

// type-7 quantile (linear interpolation between order statistics)
double quantile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    if (n == 1) return values[0];
    const double h = (static_cast<double>(n) - 1.0) * p;
    const size_t lo = static_cast<size_t>(std::floor(h));
    const size_t hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

StrategyKind strategy_kind_from_string(const std::string& name) {
    if (name == "cmaes") return StrategyKind::cmaes;
    if (name == "ga") return StrategyKind::ga;
    if (name == "random") return StrategyKind::random_search;
    if (name == "spray") return StrategyKind::gaussian_spray;
    throw ConfigError("unknown strategy '" + name + "'");
}

} // namespace

void write_trace_csv(const std::filesystem::path& path, std::uint64_t run_seed,
                     const std::vector<TraceRow>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << kTraceHeader << '\n';
    for (const TraceRow& row : rows) {
        const DiagnosticCounters& c = row.counters;
        out << run_seed << ',' << row.iteration << ',' << row.eval_index << ',' << row.strategy
            << ',' << format_double(row.af_value) << ',' << format_double(row.y_raw) << ','
            << format_double(row.best_so_far) << ',' << c.af(StrategyKind::cmaes) << ','
            << c.af(StrategyKind::ga) << ',' << c.af(StrategyKind::random_search) << ','
            << c.mean(StrategyKind::cmaes) << ',' << c.mean(StrategyKind::ga) << ','
            << c.mean(StrategyKind::random_search) << ',' << c.variance(StrategyKind::cmaes) << ','
            << c.variance(StrategyKind::ga) << ',' << c.variance(StrategyKind::random_search)
            << '\n';
    }
    if (!out) throw std::runtime_error("failed while writing " + path.string());
}

ParsedTrace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty trace file " + path.string());
    if (line != kTraceHeader) throw std::runtime_error("unexpected trace header in " + path.string());

    ParsedTrace parsed;
    bool have_seed = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 16) throw std::runtime_error("malformed trace row in " + path.string());

        if (!have_seed) {
            parsed.run_seed = static_cast<std::uint64_t>(parse_long(fields[0], path.string()));
            have_seed = true;
        }
        TraceRow row;
        row.iteration = static_cast<int>(parse_long(fields[1], path.string()));
        row.eval_index = static_cast<int>(parse_long(fields[2], path.string()));
        row.strategy = fields[3];
        row.af_value = parse_double(fields[4], path.string());
        row.y_raw = parse_double(fields[5], path.string());
        row.best_so_far = parse_double(fields[6], path.string());
        auto set = [&](std::array<long, 4>& arr, StrategyKind kind, const std::string& tok) {
            arr[static_cast<int>(kind)] = parse_long(tok, path.string());
        };
        set(row.counters.wins_af_value, StrategyKind::cmaes, fields[7]);
        set(row.counters.wins_af_value, StrategyKind::ga, fields[8]);
        set(row.counters.wins_af_value, StrategyKind::random_search, fields[9]);
        set(row.counters.wins_low_mean, StrategyKind::cmaes, fields[10]);
        set(row.counters.wins_low_mean, StrategyKind::ga, fields[11]);
        set(row.counters.wins_low_mean, StrategyKind::random_search, fields[12]);
        set(row.counters.wins_high_variance, StrategyKind::cmaes, fields[13]);
        set(row.counters.wins_high_variance, StrategyKind::ga, fields[14]);
        set(row.counters.wins_high_variance, StrategyKind::random_search, fields[15]);
        parsed.rows.push_back(std::move(row));
    }
    return parsed;
}

std::vector<SummaryRow> summarize(const std::vector<std::vector<TraceRow>>& traces) {
    if (traces.empty()) return {};
    const size_t evals = traces.front().size();
    for (const auto& t : traces) {
        if (t.size() != evals) throw std::runtime_error("summarize: trace lengths differ");
    }
    std::vector<SummaryRow> summary(evals);
    std::vector<double> column(traces.size());
    for (size_t e = 0; e < evals; ++e) {
        for (size_t r = 0; r < traces.size(); ++r) column[r] = traces[r][e].best_so_far;
        SummaryRow& row = summary[e];
        row.eval_index = traces.front()[e].eval_index;
        row.median = quantile(column, 0.5);
        row.mean = 0.0;
        for (double v : column) row.mean += v;
        row.mean /= static_cast<double>(column.size());
        row.iqr = quantile(column, 0.75) - quantile(column, 0.25);
    }
    return summary;
}

namespace {

std::vector<RunResult> run_repetitions(const CampaignConfig& config, Variant variant) {
    std::vector<RunResult> results(config.repetitions);
    std::vector<std::exception_ptr> errors(config.repetitions);

    const Problem problem = make_problem(config.benchmark);
    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int rep = next.fetch_add(1);
            if (rep >= config.repetitions) return;
            try {
                LoopConfig loop = config.loop;
                loop.variant = variant;
                loop.seed = config.seed_base + static_cast<std::uint64_t>(rep);
                results[rep] = run(problem, loop);
            } catch (...) {
                errors[rep] = std::current_exception();
            }
        }
    };
    const int jobs = std::max(1, std::min(config.jobs, config.repetitions));
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    return results;
}

std::string variant_token(Variant v) {
    std::string token = to_string(v);
    std::replace(token.begin(), token.end(), '-', '_');
    return token;
}

} // namespace

CampaignResult run_campaign(const CampaignConfig& config) {
    if (config.repetitions < 1) throw ConfigError("repetitions must be >= 1");
    std::filesystem::create_directories(config.out_dir);

    CampaignResult out;
    const Variant primary = config.loop.variant;
    const std::vector<RunResult> results = run_repetitions(config, primary);

    std::vector<std::vector<TraceRow>> traces;
    traces.reserve(results.size());
    for (int rep = 0; rep < config.repetitions; ++rep) {
        const std::uint64_t seed = config.seed_base + static_cast<std::uint64_t>(rep);
        const auto path = config.out_dir / ("trace_" + variant_token(primary) + "_seed" +
                                            std::to_string(seed) + ".csv");
        write_trace_csv(path, seed, results[rep].trace);
        out.trace_files.push_back(path);
        out.final_best.push_back(results[rep].final_best);
        traces.push_back(results[rep].trace);
    }

    out.summary = summarize(traces);
    out.summary_file = config.out_dir / ("summary_" + variant_token(primary) + ".csv");
    {
        std::ofstream s(out.summary_file, std::ios::binary | std::ios::trunc);
        if (!s) throw std::runtime_error("cannot open " + out.summary_file.string());
        s << "eval_index,median_best,mean_best,iqr_best\n";
        for (const SummaryRow& row : out.summary) {
            s << row.eval_index << ',' << format_double(row.median) << ','
              << format_double(row.mean) << ',' << format_double(row.iqr) << '\n';
        }
    }

    if (config.paired_variant.has_value()) {
        const Variant other = *config.paired_variant;
        CampaignConfig paired = config;
        paired.loop.variant = other;
        apply_variant(paired.loop);
        const std::vector<RunResult> paired_results = run_repetitions(paired, other);
        for (int rep = 0; rep < config.repetitions; ++rep) {
            const std::uint64_t seed = config.seed_base + static_cast<std::uint64_t>(rep);
            const auto path = config.out_dir / ("trace_" + variant_token(other) + "_seed" +
                                                std::to_string(seed) + ".csv");
            write_trace_csv(path, seed, paired_results[rep].trace);
            out.trace_files.push_back(path);
            out.paired_final_best.push_back(paired_results[rep].final_best);
        }
        out.compare_file = config.out_dir / ("compare_" + variant_token(primary) + "_vs_" +
                                             variant_token(other) + ".csv");
        std::ofstream c(out.compare_file, std::ios::binary | std::ios::trunc);
        if (!c) throw std::runtime_error("cannot open " + out.compare_file.string());
        c << "seed,final_" << variant_token(primary) << ",final_" << variant_token(other) << '\n';
        for (int rep = 0; rep < config.repetitions; ++rep) {
            const std::uint64_t seed = config.seed_base + static_cast<std::uint64_t>(rep);
            c << seed << ',' << format_double(out.final_best[rep]) << ','
              << format_double(out.paired_final_best[rep]) << '\n';
        }
    }
    return out;
}

CampaignConfig parse_cli(const std::vector<std::string>& args) {
    CLI::App app{"High-dimensional Bayesian optimization with heuristic AF-maximizer initialization"};
    app.set_config("--config")->description("key=value file; flags override file values");

    std::string function;
    int dim = 0;
    int evals = 1000;
    int batch = 10;
    std::string af = "ucb";
    double beta = 1.96;
    std::string variant = "aibo";
    std::string strategies;
    int k = 500;
    int n = 1;
    int init_samples = 50;
    int pop_size = 50;
    double sigma0 = 0.2;
    double spray_spread = 0.1;
    std::uint64_t seed = 0;
    int reps = 5;
    int jobs = 1;
    std::string out = "runs";
    std::string paired;

    app.add_option("--function", function, "benchmark function name")->required();
    app.add_option("--dim", dim, "problem dimension")->required();
    app.add_option("--evals", evals, "total evaluation budget (initial design included)");
    app.add_option("--batch", batch, "points proposed per iteration (q)");
    app.add_option("--af", af, "acquisition function family")->check(CLI::IsMember({"ucb", "ei"}));
    app.add_option("--beta", beta, "UCB beta_t");
    app.add_option("--variant", variant, "loop variant")
        ->check(CLI::IsMember({"aibo", "aibo-none", "bo-grad", "bo-es", "bo-random", "aibo-ga",
                               "aibo-cmaes", "aibo-gacma"}));
    app.add_option("--strategies", strategies,
                   "comma list of initialization strategies (cmaes,ga,random,spray)");
    app.add_option("--k", k, "raw candidates asked per strategy");
    app.add_option("--n", n, "top-n initial points per strategy");
    app.add_option("--init-samples", init_samples, "initial uniform design size (N)");
    app.add_option("--pop-size", pop_size, "GA population size");
    app.add_option("--sigma0", sigma0, "CMA-ES initial step size");
    app.add_option("--spray-spread", spray_spread, "gaussian spray standard deviation");
    app.add_option("--seed", seed, "base seed");
    app.add_option("--reps", reps, "seeded repetitions");
    app.add_option("--jobs", jobs, "parallel repetitions");
    app.add_option("--out", out, "output directory");
    app.add_option("--paired-variant", paired, "also run this variant on the same seeds");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }

    if (dim < 1) throw ConfigError("--dim must be >= 1");
    if (evals < 1) throw ConfigError("--evals must be >= 1");
    if (batch < 1) throw ConfigError("--batch must be >= 1");
    if (beta <= 0.0) throw ConfigError("--beta must be positive");
    if (k < 1) throw ConfigError("--k must be >= 1");
    if (n < 1) throw ConfigError("--n must be >= 1");
    if (n > k) throw ConfigError("--n cannot exceed --k");
    if (init_samples < 2) throw ConfigError("--init-samples must be >= 2");
    if (pop_size < 2) throw ConfigError("--pop-size must be >= 2");
    if (sigma0 <= 0.0) throw ConfigError("--sigma0 must be positive");
    if (reps < 1) throw ConfigError("--reps must be >= 1");
    if (jobs < 1) throw ConfigError("--jobs must be >= 1");
    if (evals < init_samples + batch) {
        throw ConfigError("--evals must cover the initial design plus one batch");
    }

    CampaignConfig config;
    try {
        config.benchmark = make_benchmark(benchmark_from_string(function), dim);
        config.loop.variant = variant_from_string(variant);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    apply_variant(config.loop);

    config.loop.total_evals = evals;
    config.loop.batch = batch;
    config.loop.init_samples = init_samples;
    config.loop.beta = beta;
    config.loop.af_kind = af == "ucb" ? AfKind::ucb_mc : AfKind::ei_mc;
    if (app.count("--k") > 0) config.loop.raw_per_strategy = k;
    if (app.count("--n") > 0) config.loop.starts = n;
    if (app.count("--strategies") > 0) {
        config.loop.strategies.clear();
        std::stringstream ss(strategies);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) config.loop.strategies.push_back(strategy_kind_from_string(item));
        }
        if (config.loop.strategies.empty()) throw ConfigError("--strategies list is empty");
    }
    config.loop.strategy_options.ga_pop_size = pop_size;
    config.loop.strategy_options.cma_sigma0 = sigma0;
    config.loop.strategy_options.spray_spread = spray_spread;
    config.loop.seed = seed;
    config.seed_base = seed;
    config.repetitions = reps;
    config.jobs = jobs;
    config.out_dir = out;
    if (!paired.empty()) {
        try {
            config.paired_variant = variant_from_string(paired);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    return config;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    CampaignConfig config;
    try {
        config = parse_cli(args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    try {
        const CampaignResult result = run_campaign(config);
        std::cout << "wrote " << result.trace_files.size() << " trace file(s) and "
                  << result.summary_file.string() << '\n';
        for (size_t rep = 0; rep < result.final_best.size(); ++rep) {
            std::cout << "seed " << config.seed_base + rep
                      << " final best " << format_double(result.final_best[rep]) << '\n';
        }
        if (config.paired_variant.has_value()) {
            std::cout << "comparison table: " << result.compare_file.string() << '\n';
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace aibo
