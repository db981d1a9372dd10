#include <gtest/gtest.h>

#include "oracles.hpp"
#include "svbrdf/material.hpp"

using namespace svbrdf;

namespace {

Vec3 random_hemisphere_dir(Rng& rng, double min_z = 0.05) {
  for (;;) {
    const Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1)};
    const double l = length(v);
    if (l > 0.1 && l <= 1.0 && v.z / l > min_z) return v / l;
  }
}

TexelParams random_texel(Rng& rng, double max_slope = 0.8) {
  TexelParams t;
  t.normal = normal_from_slopes(rng.uniform(-max_slope, max_slope), rng.uniform(-max_slope, max_slope));
  for (int c = 0; c < 3; ++c) {
    t.diffuse[c] = rng.uniform();
    t.specular[c] = rng.uniform();
  }
  t.roughness = rng.uniform(kRoughnessMin, 1.0);
  return t;
}

oracle::V3 v3(const Vec3& v) { return {v.x, v.y, v.z}; }

}  // namespace

TEST(Validate, CanonicalMaterialIsValid) {
  TexelParams t;
  t.diffuse = Rgb{0.5};
  t.specular = Rgb{0.5};
  t.roughness = 0.5;
  EXPECT_TRUE(validate(SvbrdfMaps(4, 3, t)).empty());
}

TEST(Validate, ShortNormalNamesPixel) {
  SvbrdfMaps m(4, 4);
  m.normal.set_rgb(2, 1, {0, 0, 0.5});
  const auto v = validate(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].map, "normal");
  EXPECT_EQ(v[0].x, 2);
  EXPECT_EQ(v[0].y, 1);
}

TEST(Validate, RoughnessBelowFloor) {
  SvbrdfMaps m(3, 3);
  m.roughness.at(0, 2) = 0.01;
  const auto v = validate(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].map, "roughness");
  // The floor itself and 1 are both admissible.
  m.roughness.at(0, 2) = kRoughnessMin;
  m.roughness.at(1, 2) = 1.0;
  EXPECT_TRUE(validate(m).empty());
}

TEST(Validate, ReportsAlbedoBackfacingNormalAndShape) {
  SvbrdfMaps m(2, 2);
  m.diffuse.at(0, 0, 1) = 1.5;
  m.specular.at(1, 1, 2) = -0.1;
  m.normal.set_rgb(1, 0, {0, 0, -1});
  EXPECT_EQ(validate(m).size(), 3u);
  m.roughness = Image(3, 2, 1, 0.5);
  const auto v = validate(m);
  EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.map == "roughness" && x.x < 0; }));
}

TEST(EvalBrdf, PureLambertAtNormalIncidence) {
  const Vec3 n{0, 0, 1};
  for (double r : {0.045, 0.3, 1.0}) {
    const Rgb f = eval_brdf(n, Rgb{0.5}, Rgb{0.0}, r, n, n);
    // Specular 0 still leaves the Schlick tail (1 - s)(1 - hd)^5, which is 0 at hd = 1.
    EXPECT_NEAR(f.x, 0.5 / kPi, 1e-15);
    EXPECT_NEAR(f.y, 0.5 / kPi, 1e-15);
    EXPECT_NEAR(f.z, 0.5 / kPi, 1e-15);
  }
}

TEST(EvalBrdf, BackfacingIsZero) {
  const Vec3 n{0, 0, 1};
  EXPECT_EQ(eval_brdf(n, Rgb{0.5}, Rgb{0.5}, 0.5, {0, 0, -1}, n), Rgb{0.0});
  EXPECT_EQ(eval_brdf(n, Rgb{0.5}, Rgb{0.5}, 0.5, n, normalize(Vec3{1, 0, -0.1})), Rgb{0.0});
}

TEST(EvalBrdf, SpecularOnlyAtNormalIncidenceMatchesOracle) {
  // D(1) = 1 / (pi alpha^2), F = 0.04, G = 1 at normal incidence.
  const Vec3 n{0, 0, 1};
  const Rgb f = eval_brdf(n, Rgb{0.0}, Rgb{0.04}, 0.5, n, n);
  const double expected = oracle::cook_torrance({0, 0, 1}, 0.0, 0.04, 0.5, {0, 0, 1}, {0, 0, 1});
  const double alpha = 0.25;
  EXPECT_NEAR(expected, 0.04 / (kPi * alpha * alpha) / 4.0, 1e-15);
  EXPECT_NEAR(f.x, expected, 1e-14);
}

TEST(EvalBrdf, MatchesScalarOracleOnRandomInputs) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const TexelParams t = random_texel(rng);
    const Vec3 wi = random_hemisphere_dir(rng, -0.3), wo = random_hemisphere_dir(rng, -0.3);
    const Rgb f = eval_brdf(t, wi, wo);
    for (int c = 0; c < 3; ++c) {
      const double ref = oracle::cook_torrance(v3(t.normal), t.diffuse[c], t.specular[c], t.roughness,
                                               v3(wi), v3(wo));
      EXPECT_LE(oracle::rel_err(f[c], ref, 1e-300), 1e-10) << "sample " << i;
    }
  }
}

TEST(EvalBrdf, ReciprocityIsExact) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const TexelParams t = random_texel(rng);
    const Vec3 wi = random_hemisphere_dir(rng), wo = random_hemisphere_dir(rng);
    EXPECT_EQ(eval_brdf(t, wi, wo), eval_brdf(t, wo, wi));
  }
}

TEST(EvalBrdf, NonNegative) {
  Rng rng(6);
  for (int i = 0; i < 10000; ++i) {
    const TexelParams t = random_texel(rng, 3.0);
    const Rgb f = eval_brdf(t, random_hemisphere_dir(rng, -1), random_hemisphere_dir(rng, -1));
    EXPECT_GE(f.x, 0.0);
    EXPECT_GE(f.y, 0.0);
    EXPECT_GE(f.z, 0.0);
  }
}

TEST(EvalBrdf, IsotropicAboutNormal) {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    TexelParams t = random_texel(rng);
    t.normal = {0, 0, 1};
    const Vec3 wi = random_hemisphere_dir(rng), wo = random_hemisphere_dir(rng);
    const double a = rng.uniform(0, 2 * kPi);
    const auto rot = [&](const Vec3& v) {
      return Vec3{std::cos(a) * v.x - std::sin(a) * v.y, std::sin(a) * v.x + std::cos(a) * v.y, v.z};
    };
    const Rgb f0 = eval_brdf(t, wi, wo), f1 = eval_brdf(t, rot(wi), rot(wo));
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(f0[c], f1[c], 1e-10 * std::max(1.0, f0[c]));
  }
}

TEST(EvalBrdfGrad, LambertPartials) {
  const Vec3 n{0, 0, 1};
  const BrdfJacobian J = eval_brdf_grad(n, Rgb{0.5}, Rgb{0.0}, 0.5, n, n);
  EXPECT_DOUBLE_EQ(J.partial[param::kDiffuse].x, 1.0 / kPi);
  EXPECT_EQ(J.partial[param::kDiffuse].y, 0.0);
  EXPECT_DOUBLE_EQ(J.partial[param::kDiffuse + 2].z, 1.0 / kPi);
  // Fresnel is exactly F0 at normal incidence, so d/dF0 equals the lobe and
  // the partials of the *diffuse-only* material w.r.t. specular channels are
  // confined to their own channel.
  EXPECT_EQ(J.partial[param::kSpecular].y, 0.0);
  EXPECT_EQ(J.partial[param::kSpecular].z, 0.0);
}

TEST(EvalBrdfGrad, BackfacingPartialsVanish) {
  const Vec3 n{0, 0, 1};
  const BrdfJacobian J = eval_brdf_grad(n, Rgb{0.5}, Rgb{0.5}, 0.5, {0, 0, -1}, n);
  EXPECT_EQ(J.value, Rgb{0.0});
  for (const Rgb& p : J.partial) EXPECT_EQ(p, Rgb{0.0});
}

TEST(EvalBrdfGrad, MatchesCentralDifferences) {
  Rng rng(21);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const TexelParams base = random_texel(rng);
    const auto s0 = slopes_from_normal(base.normal);
    const Vec3 wi = random_hemisphere_dir(rng, 0.2), wo = random_hemisphere_dir(rng, 0.2);
    // Stay clear of the clamp boundary.
    if (dot(base.normal, wi) < 0.1 || dot(base.normal, wo) < 0.1) continue;
    const BrdfJacobian J = eval_brdf_grad(base, wi, wo);
    EXPECT_EQ(J.value, eval_brdf(base, wi, wo));
    for (int k = 0; k < param::kCount; ++k) {
      const auto f = [&](double v) {
        TexelParams t = base;
        auto s = s0;
        if (k == param::kSlopeX) s[0] = v;
        if (k == param::kSlopeY) s[1] = v;
        if (k <= param::kSlopeY) t.normal = normal_from_slopes(s[0], s[1]);
        if (k >= param::kDiffuse && k < param::kSpecular) t.diffuse[k - param::kDiffuse] = v;
        if (k >= param::kSpecular && k < param::kRoughness) t.specular[k - param::kSpecular] = v;
        if (k == param::kRoughness) t.roughness = v;
        return eval_brdf(t, wi, wo);
      };
      double x0 = 0;
      if (k == param::kSlopeX) x0 = s0[0];
      else if (k == param::kSlopeY) x0 = s0[1];
      else if (k < param::kSpecular) x0 = base.diffuse[k - param::kDiffuse];
      else if (k < param::kRoughness) x0 = base.specular[k - param::kSpecular];
      else x0 = base.roughness;
      const double h = 1e-4;
      const Rgb fp = f(x0 + h), fm = f(x0 - h);
      for (int c = 0; c < 3; ++c) {
        const double fd = (fp[c] - fm[c]) / (2 * h);
        const double scale = std::max(1.0, std::abs(J.value[c]));
        EXPECT_LE(std::abs(fd - J.partial[k][c]) / std::max(std::abs(fd), 1e-3 * scale), 1e-4)
            << "sample " << i << " param " << k << " channel " << c;
      }
    }
    ++checked;
  }
  EXPECT_GE(checked, 50);
}

TEST(Slopes, RoundTripAndJacobian) {
  const Vec3 n = normal_from_slopes(1.0, 0.0);
  EXPECT_NEAR(n.x, 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(n.z, 1 / std::sqrt(2.0), 1e-15);
  const auto s = slopes_from_normal(normal_from_slopes(0.3, -0.7));
  EXPECT_NEAR(s[0], 0.3, 1e-14);
  EXPECT_NEAR(s[1], -0.7, 1e-14);
}
