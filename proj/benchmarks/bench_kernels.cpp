#include <benchmark/benchmark.h>

#include <random>

#include "vcmorph/dtw.hpp"
#include "vcmorph/gmm.hpp"
#include "vcmorph/lpc.hpp"
#include "vcmorph/lsf.hpp"

using namespace vc;

namespace {

std::vector<double> random_signal(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> dist;
    std::vector<double> x(n);
    for (double& v : x) v = dist(rng);
    return x;
}

void bm_levinson(benchmark::State& state) {
    const int order = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    const auto x = random_signal(rng, 640);
    const auto r = autocorrelate(x, order);
    for (auto _ : state) {
        benchmark::DoNotOptimize(levinson_durbin(r, order));
    }
}

void bm_lsf_round_trip(benchmark::State& state) {
    const int order = static_cast<int>(state.range(0));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> refl(-0.8, 0.8);
    std::vector<double> a;
    for (int m = 0; m < order; ++m) {
        const double k = refl(rng);
        std::vector<double> prev = a;
        a.resize(m + 1);
        a[m] = k;
        for (int i = 0; i < m; ++i) a[i] = prev[i] - k * prev[m - 1 - i];
    }
    const LpcModel model{order, a, 1.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(lsf_to_lpc(lpc_to_lsf(model)));
    }
}

void bm_dtw(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> dist;
    FeatureSequence a, b;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd va(18), vb(18);
        for (int d = 0; d < 18; ++d) {
            va[d] = dist(rng);
            vb[d] = dist(rng);
        }
        a.frames.push_back(va);
        a.timing.push_back(i);
        a.voiced.push_back(true);
        b.frames.push_back(vb);
        b.timing.push_back(i);
        b.voiced.push_back(true);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(dtw_align(a, b));
    }
}

void bm_em_iteration(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    std::mt19937_64 rng(4);
    std::normal_distribution<double> dist;
    std::vector<Eigen::VectorXd> data;
    for (int i = 0; i < 1000; ++i) {
        Eigen::VectorXd v(36);
        for (int d = 0; d < 36; ++d) v[d] = dist(rng) + (i % k);
        data.push_back(v);
    }
    EmConfig cfg;
    cfg.num_components = k;
    cfg.max_iters = 5;
    cfg.seed = 7;
    for (auto _ : state) {
        benchmark::DoNotOptimize(em_fit(data, cfg));
    }
}

}  // namespace

BENCHMARK(bm_levinson)->Arg(10)->Arg(18)->Arg(24);
BENCHMARK(bm_lsf_round_trip)->Arg(10)->Arg(18);
BENCHMARK(bm_dtw)->Arg(100)->Arg(300);
BENCHMARK(bm_em_iteration)->Arg(1)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
