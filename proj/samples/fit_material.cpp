// Fits SVBRDF maps to a handful of synthetic flash photographs and reports
// how close the fit is to the material that produced them.
//
//   fit_material [iterations] [learning-rate]

#include <cstdio>
#include <cstdlib>

#include "svbrdf/svbrdf.hpp"

using namespace svbrdf;

int main(int argc, char** argv) {
  const int iters = argc > 1 ? std::atoi(argv[1]) : 500;
  const double lr = argc > 2 ? std::atof(argv[2]) : 0.01;

  const SvbrdfMaps truth = procedural_material(24, 42);
  GenConfig capture;
  Rng rng(7);
  std::vector<CalibratedInput> photos;
  for (int i = 0; i < 6; ++i) {
    const SceneSample scene = sample_scene(capture, rng);
    DegradeParams dp;
    dp.seed = rng.next_u64();
    photos.push_back(calibrated_from_ldr(degrade(render(truth, scene), dp), scene));
  }

  OptimizeOptions opts;
  opts.hyper.lr = lr;
  opts.callback_every = std::max(1, iters / 5);
  opts.callback = [&](long long it, const SvbrdfMaps& m) {
    std::printf("step %5lld  diffuse rmse %.4f  roughness rmse %.4f\n", it, rmse(m.diffuse, truth.diffuse),
                rmse(m.roughness, truth.roughness));
  };
  const OptimizeResult fit = optimize(photos, LossWeights{}, iters, opts);
  std::printf("objective %.5f -> %.5f\n", fit.trace.front().objective, fit.trace.back().objective);

  Rng eval_rng(11);
  const SceneSample novel = sample_loss_configs(1, eval_rng).front();
  std::printf("novel-view ssim %.4f\n", ssim(tone_map(render(fit.maps, novel)), tone_map(render(truth, novel))));
}
