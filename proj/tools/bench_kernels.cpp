// Times the OpenMP kernels against their serial references.

#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#else
#include <chrono>
static double omp_get_wtime() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}
static int omp_get_max_threads() { return 1; }
#endif

#include "lrc/distill.hpp"
#include "lrc/matrix.hpp"

using namespace lrc;

namespace {

template <typename F>
double time_best_of(F&& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        double t0 = omp_get_wtime();
        fn();
        best = std::min(best, omp_get_wtime() - t0);
    }
    return best;
}

void bench_matmul() {
    std::printf("matmul: omp kernel vs serial reference (GFLOP/s, best of 5)\n");
    std::printf("%8s %12s %12s %8s\n", "n", "omp", "serial", "speedup");
    RngState rng(1);
    for (std::size_t n : {64u, 128u, 256u, 512u}) {
        Matrix a = random_gaussian(rng, n, n);
        Matrix b = random_gaussian(rng, n, n);
        const double flops = 2.0 * static_cast<double>(n) * n * n;
        double t_omp = time_best_of([&] { matmul(a, b); }, 5);
        double t_ser = time_best_of([&] { ref::matmul(a, b); }, 5);
        std::printf("%8zu %12.2f %12.2f %7.2fx\n", n, flops / t_omp / 1e9,
                    flops / t_ser / 1e9, t_ser / t_omp);
    }
}

void bench_distill_step() {
    std::printf("\ndistill step: batch-parallel loss+grads (steps/s, best of 5)\n");
    ModelConfig cfg;
    cfg.vocab_size = 16;
    cfg.num_layers = 2;
    cfg.hidden_dim = 32;
    cfg.num_heads = 4;
    cfg.seq_len = 32;
    RngState rng(2);
    TeacherModel t = init_teacher(cfg, rng);
    StudentModel s = init_student(t, 8, StudentInit::Svd, rng);
    Corpus c = generate_markov_corpus(3, 2, cfg.vocab_size, 8192);
    RngState br(4);
    for (std::size_t bs : {1u, 8u, 32u}) {
        Batch b = sample_batch(c, bs, cfg.seq_len, br);
        double dt = time_best_of([&] { distill_loss_and_grads(s, t, b, {}); }, 5);
        std::printf("  batch %2zu: %8.2f steps/s  (%.2f ms)\n", bs, 1.0 / dt, dt * 1e3);
    }
}

}  // namespace

int main() {
    std::printf("threads: %d\n\n", omp_get_max_threads());
    bench_matmul();
    bench_distill_step();
    return 0;
}
