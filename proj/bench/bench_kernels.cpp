// Serial reference vs OpenMP kernels: phase-1 influence production and
// field computation on a large open floor.

#include "irm/fms/model.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>

using namespace irm;
using namespace irm::fms;

namespace {

template <class F>
double best_ms(int reps, F&& f)
{
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

FmsConfig large_floor(int side, int agvs, int shops)
{
    std::vector<std::string> rows(static_cast<std::size_t>(side), std::string(static_cast<std::size_t>(side), '.'));
    for (int y = 4; y < side - 4; y += 6) {
        for (int x = 2; x < side - 2; ++x) {
            if (x % 9 != 0) rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = '#';
        }
    }
    FmsConfig c{GridMap::from_rows(rows), {}, {}, {}, {}, {}};
    std::mt19937_64 rng(7);
    std::set<Cell> used;
    auto pick = [&] {
        std::uniform_int_distribution<int> d(0, side - 1);
        while (true) {
            Cell cell{d(rng), d(rng)};
            if (c.grid.is_free(cell) && used.insert(cell).second) return cell;
        }
    };
    for (int i = 0; i < shops; ++i) c.shops.push_back({"S" + std::to_string(i), pick()});
    for (int i = 0; i < agvs; ++i) c.agvs.push_back({"a" + std::to_string(i), pick()});
    for (int i = 0; i < agvs; ++i) {
        c.tasks.push_back({"t" + std::to_string(i), c.shops[static_cast<std::size_t>(i % shops)].id,
                           c.shops[static_cast<std::size_t>((i + 1) % shops)].id, 0});
    }
    c.params.attract_amplitude = side;
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    const int side = argc > 1 ? std::atoi(argv[1]) : 48;
    const int agvs = argc > 2 ? std::atoi(argv[2]) : 160;
    const int reps = 5;
    auto world = std::make_shared<const FmsWorld>(large_floor(side, agvs, 12));
    auto model = make_fms_model(world, 0);
    auto state = make_fms_state(model, *world);
    for (int t = 0; t < 4; ++t) state = step(model, state);

    std::printf("threads=%d grid=%dx%d agvs=%d\n", omp_get_max_threads(), side, side, agvs);
    std::printf("%-22s %12s %12s %8s %s\n", "kernel", "serial ms", "parallel ms", "speedup", "equal");

    Production ps, pp;
    const double s1 = best_ms(reps, [&] { ps = produce_influences_serial(model, state); });
    const double p1 = best_ms(reps, [&] { pp = produce_influences(model, state); });
    std::printf("%-22s %12.3f %12.3f %8.2f %s\n", "produce_influences", s1, p1, s1 / p1, ps == pp ? "yes" : "NO");

    std::vector<Emitter> attract, repulse;
    for (const auto& s : world->config().shops) attract.push_back({s.cell, side});
    for (const auto& a : world->config().agvs) repulse.push_back({a.cell, 4});
    FieldSample fs, fp;
    const double s2 = best_ms(reps, [&] { fs = compute_fields(world->grid(), attract, repulse, Execution::serial); });
    const double p2 = best_ms(reps, [&] { fp = compute_fields(world->grid(), attract, repulse, Execution::parallel); });
    std::printf("%-22s %12.3f %12.3f %8.2f %s\n", "compute_fields", s2, p2, s2 / p2, fs == fp ? "yes" : "NO");

    StepOptions serial{Execution::serial, std::nullopt, std::nullopt};
    SystemState a, b;
    const double s3 = best_ms(reps, [&] { a = step(model, state, serial); });
    const double p3 = best_ms(reps, [&] { b = step(model, state); });
    std::printf("%-22s %12.3f %12.3f %8.2f %s\n", "full step", s3, p3, s3 / p3, a == b ? "yes" : "NO");
    return ps == pp && fs == fp && a == b ? 0 : 1;
}
