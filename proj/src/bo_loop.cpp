#include <aibo/bo_loop.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace aibo {

Variant variant_from_string(std::string_view name) {
    if (name == "aibo") return Variant::aibo;
    if (name == "aibo-none") return Variant::aibo_none;
    if (name == "bo-grad") return Variant::bo_grad;
    if (name == "bo-es") return Variant::bo_es;
    if (name == "bo-random") return Variant::bo_random;
    if (name == "aibo-ga") return Variant::aibo_ga;
    if (name == "aibo-cmaes") return Variant::aibo_cmaes;
    if (name == "aibo-gacma") return Variant::aibo_gacma;
    throw std::invalid_argument("unknown variant '" + std::string(name) + "'");
}

const char* to_string(Variant variant) {
    switch (variant) {
    case Variant::aibo: return "aibo";
    case Variant::aibo_none: return "aibo-none";
    case Variant::bo_grad: return "bo-grad";
    case Variant::bo_es: return "bo-es";
    case Variant::bo_random: return "bo-random";
    case Variant::aibo_ga: return "aibo-ga";
    case Variant::aibo_cmaes: return "aibo-cmaes";
    case Variant::aibo_gacma: return "aibo-gacma";
    }
    return "unknown";
}

MaximizerMode maximizer_mode(Variant variant) {
    switch (variant) {
    case Variant::aibo_none:
    case Variant::bo_random: return MaximizerMode::none;
    case Variant::bo_es: return MaximizerMode::cmaes;
    default: return MaximizerMode::gradient;
    }
}

void apply_variant(LoopConfig& config) {
    using SK = StrategyKind;
    switch (config.variant) {
    case Variant::aibo:
    case Variant::aibo_none:
        config.strategies = {SK::cmaes, SK::ga, SK::random_search};
        break;
    case Variant::bo_grad:
        config.strategies = {SK::random_search};
        config.raw_per_strategy = 2000;
        config.starts = 10;
        break;
    case Variant::bo_es:
    case Variant::bo_random:
        config.strategies = {SK::random_search};
        break;
    case Variant::aibo_ga:
        config.strategies = {SK::ga};
        break;
    case Variant::aibo_cmaes:
        config.strategies = {SK::cmaes};
        break;
    case Variant::aibo_gacma:
        config.strategies = {SK::cmaes, SK::ga};
        break;
    }
}

Problem make_problem(const BenchmarkSpec& spec) {
    Problem problem;
    problem.bounds = Bounds(spec.lower, spec.upper);
    problem.objective = [spec](const Vector& x_raw) {
        // guard against one-ulp box violations from the unit-cube round trip
        const Vector clipped = x_raw.cwiseMax(spec.lower).cwiseMin(spec.upper);
        return evaluate(spec, clipped);
    };
    return problem;
}

Candidate select_query(const std::vector<Candidate>& candidates) {
    if (candidates.empty()) throw std::invalid_argument("select_query: empty candidate list");
    int best = 0;
    for (int i = 1; i < static_cast<int>(candidates.size()); ++i) {
        if (candidates[i].af_value > candidates[best].af_value) best = i;
    }
    return candidates[best];
}

void update_diagnostics(DiagnosticCounters& counters,
                        const std::vector<SlotCandidate>& candidates) {
    if (candidates.empty()) return;
    int best_af = 0, best_mean = 0, best_var = 0;
    for (int i = 1; i < static_cast<int>(candidates.size()); ++i) {
        if (candidates[i].af_value > candidates[best_af].af_value) best_af = i;
        if (candidates[i].post_mean < candidates[best_mean].post_mean) best_mean = i;
        if (candidates[i].post_variance > candidates[best_var].post_variance) best_var = i;
    }
    counters.wins_af_value[static_cast<int>(candidates[best_af].kind)]++;
    counters.wins_low_mean[static_cast<int>(candidates[best_mean].kind)]++;
    counters.wins_high_variance[static_cast<int>(candidates[best_var].kind)]++;
    counters.slots++;
}

namespace {

void validate(const LoopConfig& config, int dim) {
    if (dim < 1) throw std::invalid_argument("run: problem dimension must be >= 1");
    if (config.init_samples < 2) throw std::invalid_argument("run: init_samples must be >= 2");
    if (config.batch < 1) throw std::invalid_argument("run: batch must be >= 1");
    if (config.starts < 1) throw std::invalid_argument("run: starts must be >= 1");
    if (config.starts > config.raw_per_strategy) {
        throw std::invalid_argument("run: starts (n) cannot exceed raw candidates (k)");
    }
    if (config.total_evals < config.init_samples + config.batch) {
        throw std::invalid_argument("run: budget leaves no room for a single batch");
    }
    if (config.strategies.empty()) throw std::invalid_argument("run: no strategies configured");
    for (size_t i = 0; i < config.strategies.size(); ++i) {
        for (size_t j = i + 1; j < config.strategies.size(); ++j) {
            if (config.strategies[i] == config.strategies[j]) {
                throw std::invalid_argument("run: duplicate strategy in list");
            }
        }
    }
}

double replacement_for_nonfinite(const Vector& targets) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < targets.size(); ++i) worst = std::max(worst, targets[i]);
    if (!std::isfinite(worst)) return 1e12;
    return worst > 0.0 ? worst * 10.0 : worst + 10.0 * (1.0 + std::abs(worst));
}

Vector model_log_params(const GpModel& model) {
    Vector theta(model.dim() + 2);
    theta.head(model.dim()) = model.lengthscales.array().log();
    theta[model.dim()] = std::log(model.signal_variance);
    theta[model.dim() + 1] = std::log(model.noise_variance);
    return theta;
}

} // namespace

RunResult run(const Problem& problem, const LoopConfig& config) {
    const int d = problem.bounds.dim();
    validate(config, d);

    RngStream root(config.seed);
    RngStream init_rng = root.split("init");

    Dataset data(problem.bounds);
    RunResult result;
    DiagnosticCounters counters;
    double best = std::numeric_limits<double>::infinity();
    int eval_index = 0;

    auto record_eval = [&](int iteration, const std::string& strategy, double af_value,
                           double y_recorded, const DiagnosticCounters& snapshot) {
        if (std::isfinite(y_recorded)) best = std::min(best, y_recorded);
        TraceRow row;
        row.iteration = iteration;
        row.eval_index = ++eval_index;
        row.strategy = strategy;
        row.af_value = af_value;
        row.y_raw = y_recorded;
        row.best_so_far = best;
        row.counters = snapshot;
        result.trace.push_back(std::move(row));
    };

    // initial design: N uniform samples
    for (int i = 0; i < config.init_samples; ++i) {
        const Vector x_unit = init_rng.uniform_vector(d);
        const double y = problem.objective(problem.bounds.from_unit(x_unit));
        double y_fit = y;
        if (!std::isfinite(y)) {
            std::fprintf(stderr, "warning: non-finite objective at init sample %d\n", i);
            y_fit = replacement_for_nonfinite(data.targets_raw());
        }
        data.append_unit(x_unit, y_fit);
        record_eval(0, "init", std::numeric_limits<double>::quiet_NaN(), y, counters);
    }

    StrategyOptions opts = config.strategy_options;
    if (opts.cma_lambda == 0) {
        // one CMA generation per iteration for reasonably sized batches,
        // otherwise accumulate the standard default population
        opts.cma_lambda = config.batch >= 4 ? config.batch : default_cma_lambda(d);
    }
    std::vector<std::unique_ptr<Strategy>> strategies;
    for (StrategyKind kind : config.strategies) {
        strategies.push_back(make_strategy(kind, data.inputs_unit(), data.targets_raw(), opts,
                                           root.split(std::string("strategy/") + to_string(kind))));
    }

    const int iterations = (config.total_evals - config.init_samples) / config.batch;
    const MaximizerMode mode = maximizer_mode(config.variant);

    Vector warm_theta;
    for (int t = 1; t <= iterations; ++t) {
        const PowerTransform transform = power_transform_fit(data.targets_raw());
        data.set_transformed_targets(transform.apply(data.targets_raw()));

        FitConfig fit_config;
        fit_config.seed = root.split("fit/" + std::to_string(t)).key();
        fit_config.tol = config.fit_tol;
        if (warm_theta.size() == 0) {
            fit_config.restarts = config.first_fit_restarts;
            fit_config.max_iters = config.first_fit_max_iters;
        } else {
            fit_config.restarts = 1;
            fit_config.max_iters = config.refit_max_iters;
            fit_config.warm_start = warm_theta;
        }
        const GpModel model = fit(data, fit_config);
        warm_theta = model_log_params(model);

        AcquisitionSpec spec;
        spec.kind = config.af_kind;
        spec.beta = config.beta;
        spec.incumbent = data.targets_tf().minCoeff();
        spec.mc_samples = config.mc_samples_maximize;
        spec.base_samples = normal_bank(root.split("bank/" + std::to_string(t)),
                                        config.mc_samples_maximize, config.batch,
                                        config.low_discrepancy);
        spec.select_samples = normal_bank(root.split("bank_sel/" + std::to_string(t)),
                                          config.mc_samples_select, config.batch,
                                          config.low_discrepancy);
        AcquisitionFunction af(model, data, std::move(spec));

        RngStream es_rng = root.split("af_cma/" + std::to_string(t));

        std::vector<SlotRecord> iteration_slots;
        auto solve_slot = [&](AcquisitionFunction& surface, int slot) -> Vector {
            std::vector<Candidate> raw_candidates;
            raw_candidates.reserve(strategies.size());
            for (auto& strategy : strategies) {
                const Matrix raw = strategy->ask(config.raw_per_strategy);
                const Vector af_values = surface.value_batch(raw);
                const Matrix inits = top_n_select(raw, af_values, config.starts);
                Candidate cand;
                switch (mode) {
                case MaximizerMode::gradient:
                    cand = multi_start_maximize(inits, surface.evaluator(), config.maximizer);
                    break;
                case MaximizerMode::none:
                    cand.point = inits.row(0).transpose();
                    cand.af_value = surface.value(cand.point);
                    break;
                case MaximizerMode::cmaes:
                    cand = cma_maximize(inits, surface.evaluator(), config.af_cmaes, es_rng);
                    break;
                }
                cand.origin = strategy->kind();
                raw_candidates.push_back(std::move(cand));
            }

            // compare candidates on the larger selection bank
            SlotRecord record;
            record.iteration = t;
            record.slot = slot;
            std::vector<Candidate> selection;
            selection.reserve(raw_candidates.size());
            for (const Candidate& cand : raw_candidates) {
                const Posterior marginal =
                    posterior(model, data, cand.point.transpose(), false);
                SlotCandidate sc;
                sc.kind = cand.origin;
                sc.point = cand.point;
                sc.af_value = surface.select_value(cand.point);
                sc.post_mean = marginal.mean[0];
                sc.post_variance = marginal.variance[0];
                record.candidates.push_back(sc);
                Candidate sel = cand;
                sel.af_value = sc.af_value;
                selection.push_back(std::move(sel));
            }
            const Candidate chosen = select_query(selection);
            int chosen_index = 0;
            for (int i = 0; i < static_cast<int>(selection.size()); ++i) {
                if (selection[i].af_value == chosen.af_value) {
                    chosen_index = i;
                    break;
                }
            }
            record.chosen = chosen_index;
            update_diagnostics(counters, record.candidates);
            record.counters = counters;
            iteration_slots.push_back(std::move(record));
            return chosen.point;
        };

        const Matrix batch_points = greedy_sequential_batch(af, config.batch, solve_slot);

        Vector y_fit(config.batch);
        for (int slot = 0; slot < config.batch; ++slot) {
            const Vector x_unit = batch_points.row(slot).transpose();
            const double y = problem.objective(problem.bounds.from_unit(x_unit));
            double fit_value = y;
            if (!std::isfinite(y)) {
                std::fprintf(stderr, "warning: non-finite objective at iteration %d slot %d\n", t,
                             slot);
                fit_value = replacement_for_nonfinite(data.targets_raw());
            }
            y_fit[slot] = fit_value;
            const SlotRecord& record = iteration_slots[slot];
            const SlotCandidate& winner = record.candidates[record.chosen];
            record_eval(t, to_string(winner.kind), winner.af_value, y, record.counters);
            data.append_unit(x_unit, fit_value);
        }
        for (auto& strategy : strategies) strategy->tell(batch_points, y_fit);
        for (auto& record : iteration_slots) result.slots.push_back(std::move(record));
    }

    result.final_best = best;
    return result;
}

} // namespace aibo
