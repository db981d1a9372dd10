// The fusion network accepts any number of photographs. This feeds it one
// to five views of the same material and shows that the prediction does not
// depend on the order of the inputs.

#include <algorithm>
#include <numeric>
#include <cstdio>

#include "svbrdf/svbrdf.hpp"

using namespace svbrdf;

int main() {
  NetConfig cfg;
  cfg.input_size = 32;
  cfg.depth = 3;
  const FusionNet net(cfg, 1);

  const SvbrdfMaps material = procedural_material(32, 3);
  GenConfig capture;
  Rng rng(5);
  std::vector<Image> views;
  for (int i = 0; i < 5; ++i) {
    const SceneSample scene = sample_scene(capture, rng);
    views.push_back(invert_gamma(degrade(render(material, scene), {}), 2.2));
  }

  for (size_t n = 1; n <= views.size(); ++n) {
    std::vector<Image> subset(views.begin(), views.begin() + long(n));
    const SvbrdfMaps a = forward(net, subset);
    std::reverse(subset.begin(), subset.end());
    const SvbrdfMaps b = forward(net, subset);
    std::printf("%zu input(s): mean roughness %.4f, reversed order identical: %s\n", n,
                std::accumulate(a.roughness.data().begin(), a.roughness.data().end(), 0.0) / (32 * 32),
                a == b ? "yes" : "no");
  }
}
