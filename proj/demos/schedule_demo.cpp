// Minimal library walkthrough: train a small MLP on a deliberately noisy
// synthetic task while the agent schedules the batch size, then print the
// per-epoch schedule. The high learning rate keeps the dynamics stochastic,
// so the schedule drifts upward as training progresses.

#include <cstdio>

#include "hyperlearn/dataset.hpp"
#include "hyperlearn/loop.hpp"

int main() {
    using namespace hyperlearn;

    SyntheticOptions heavy_overlap;
    heavy_overlap.noise = 2.0;

    RunSetup setup;
    setup.train = make_synthetic("two_gaussians", 1200, 7, heavy_overlap);
    setup.val = make_synthetic("two_gaussians", 400, 8, heavy_overlap);
    setup.hidden_widths = {16, 8};
    setup.codec = {.b_min = 8, .b_max = 256};
    setup.meta.scheduler = SchedulerKind::arbiter;
    setup.meta.b0 = 8;
    setup.meta.epochs = 15;
    setup.meta.eta = 0.7;
    setup.meta.zeta_phi = 0.05;
    setup.meta.zeta_alpha = 0.1;
    setup.meta.seed = 3;

    const RunResult result = run_experiment(setup);
    std::printf("epoch  val_loss  val_acc  next_B\n");
    for (const auto& e : result.log.epochs) {
        std::printf("%5zu  %8.4f  %7.3f  %6zu\n", e.epoch, e.val_loss, e.val_acc, e.next_b);
    }
    return 0;
}
