#include <maser/config.hpp>
#include <maser/dynamics.hpp>
#include <maser/resonator.hpp>
#include <maser/spins.hpp>
#include <maser/units.hpp>

#include <benchmark/benchmark.h>

namespace {

using namespace maser;

const RunConfig& config()
{
    static const RunConfig c = load_config(std::string(MASER_CONFIG_DIR) + "/qext250.cfg");
    return c;
}

void reflection_spectrum(benchmark::State& state)
{
    const auto& c = config();
    const auto points = static_cast<std::size_t>(state.range(0));
    const double thr = oscillation_threshold(c.resonator, c.ensemble);
    const auto grid = linear_grid(c.resonator.omega_r - 3 * c.resonator.kappa_tot(),
                                  c.resonator.omega_r + 3 * c.resonator.kappa_tot(), points);
    for (auto _ : state) {
        for (double w : grid) {
            benchmark::DoNotOptimize(reflection(c.resonator, spin_function(c.ensemble, 0.9 * thr, w), w));
        }
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(points));
}
BENCHMARK(reflection_spectrum)->Arg(1001)->Arg(100001);

void integrate_rate_system(benchmark::State& state)
{
    const auto p = config().rate_params(dbm_to_watts(-52.0));
    IntegrateOptions opt;
    opt.samples = 10;
    opt.adiabatic = state.range(0) != 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(integrate(RateSystemState::ground(p.n_tot), p, 5000.0, opt));
    }
    state.SetLabel(opt.adiabatic ? "adiabatic" : "full");
}
BENCHMARK(integrate_rate_system)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void steady_state_solve(benchmark::State& state)
{
    const auto p = config().rate_params(dbm_to_watts(-50.0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(steady_state(p, RateSystemState::ground(p.n_tot)));
    }
}
BENCHMARK(steady_state_solve)->Unit(benchmark::kMillisecond);

void lorentzian_extraction(benchmark::State& state)
{
    const auto& ens = config().ensemble;
    ComplexSpectrum k;
    k.frequencies = linear_grid(ens.omega_s - 5 * ens.gamma, ens.omega_s + 5 * ens.gamma,
                                static_cast<std::size_t>(state.range(0)));
    for (double w : k.frequencies) {
        k.values.push_back(spin_function(ens, 2e14, w));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(extract_delta_n(k, ens.g0, LineModel::one_lorentzian));
    }
}
BENCHMARK(lorentzian_extraction)->Arg(401)->Arg(4001);

} // namespace

BENCHMARK_MAIN();
