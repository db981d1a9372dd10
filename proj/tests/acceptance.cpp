// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [N ...] [--known-infeasible N[,N...]]
//
// With no numbers every criterion runs. The exit status counts failures,
// leaving out criteria listed with --known-infeasible (their lines still
// print FAIL).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "oracles.hpp"
#include "svbrdf/svbrdf.hpp"

namespace fs = std::filesystem;
using namespace svbrdf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Vec3 random_dir(Rng& rng, double min_z) {
  for (;;) {
    const Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double l = length(v);
    if (l > 0.1 && l <= 1.0 && v.z / l > min_z) return v / l;
  }
}

TexelParams random_texel(Rng& rng) {
  TexelParams t;
  t.normal = normal_from_slopes(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8));
  for (int c = 0; c < 3; ++c) {
    t.diffuse[c] = rng.uniform(0.02, 0.98);
    t.specular[c] = rng.uniform(0.02, 0.98);
  }
  t.roughness = rng.uniform(0.1, 1.0);
  return t;
}

SvbrdfMaps random_maps(int size, Rng& rng) {
  SvbrdfMaps m(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) m.set_texel(x, y, random_texel(rng));
  return m;
}

oracle::V3 v3(const Vec3& v) { return {v.x, v.y, v.z}; }

/// Copy of m with parameter k of texel (x, y) set to v (param:: layout).
SvbrdfMaps with_param(const SvbrdfMaps& m, int x, int y, int k, double v) {
  TexelParams t = m.texel(x, y);
  auto s = slopes_from_normal(t.normal);
  if (k <= param::kSlopeY) {
    s[size_t(k)] = v;
    t.normal = normal_from_slopes(s[0], s[1]);
  } else if (k < param::kSpecular) {
    t.diffuse[k - param::kDiffuse] = v;
  } else if (k < param::kRoughness) {
    t.specular[k - param::kSpecular] = v;
  } else {
    t.roughness = v;
  }
  SvbrdfMaps out = m;
  out.set_texel(x, y, t);
  return out;
}

double param_of(const SvbrdfMaps& m, int x, int y, int k) { return to_param_image(m).at(x, y, k); }

// ---------------------------------------------------------------------------

Outcome brdf_oracle() {
  Rng rng(101);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const TexelParams t = random_texel(rng);
    const Vec3 wi = random_dir(rng, -0.3), wo = random_dir(rng, -0.3);
    const Rgb f = eval_brdf(t, wi, wo);
    for (int c = 0; c < 3; ++c)
      worst = std::max(worst, oracle::rel_err(f[c], oracle::cook_torrance(v3(t.normal), t.diffuse[c], t.specular[c],
                                                                          t.roughness, v3(wi), v3(wo)),
                                              1e-300));
  }
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const TexelParams t = random_texel(rng);
    const Vec3 wi = random_dir(rng, -1), wo = random_dir(rng, -1);
    const Rgb a = eval_brdf(t, wi, wo), b = eval_brdf(t, wo, wi);
    for (int c = 0; c < 3; ++c)
      if (a[c] < 0 || oracle::rel_err(a[c], b[c], 1e-300) > 1e-12) ++bad;
  }
  return {worst < 1e-10 && bad == 0, fmt("max rel err %.2e, reciprocity/non-negativity violations %.0f", worst, bad)};
}

struct GradStats {
  int instances = 0;
  double worst = 0;
};

Outcome gradient_suite() {
  Rng rng(202);
  std::ostringstream detail;
  bool ok = true;
  const auto report = [&](const char* name, const GradStats& s, double tol) {
    const bool pass = s.instances >= 100 && s.worst < tol;
    ok = ok && pass;
    detail << name << " " << s.instances << "x max " << fmt("%.1e", s.worst) << (pass ? "" : " [bad]") << "; ";
  };

  GradStats brdf;
  while (brdf.instances < 100) {
    const TexelParams base = random_texel(rng);
    const Vec3 wi = random_dir(rng, 0.15), wo = random_dir(rng, 0.15);
    if (dot(base.normal, wi) < 0.1 || dot(base.normal, wo) < 0.1) continue;
    const BrdfJacobian J = eval_brdf_grad(base, wi, wo);
    SvbrdfMaps one(1, 1, base);
    for (int k = 0; k < param::kCount; ++k) {
      const double x0 = param_of(one, 0, 0, k), h = 1e-5;
      const Rgb fp = eval_brdf(with_param(one, 0, 0, k, x0 + h).texel(0, 0), wi, wo);
      const Rgb fm = eval_brdf(with_param(one, 0, 0, k, x0 - h).texel(0, 0), wi, wo);
      for (int c = 0; c < 3; ++c)
        brdf.worst = std::max(brdf.worst, oracle::rel_err((fp[c] - fm[c]) / (2 * h), J.partial[size_t(k)][c], 1e-6));
    }
    ++brdf.instances;
  }
  report("brdf_grad", brdf, 1e-4);

  // Scalar projections of the renderer and the losses, checked on all nine
  // parameters of one random texel per instance.
  const auto check_maps = [&](GradStats& st, const SvbrdfMaps& m, const Image& grad,
                              const std::function<double(const SvbrdfMaps&)>& f, double h) {
    const int x = rng.uniform_int(0, m.width - 1), y = rng.uniform_int(0, m.height - 1);
    for (int k = 0; k < param::kCount; ++k) {
      const double p0 = param_of(m, x, y, k);
      const double fd = (f(with_param(m, x, y, k, p0 + h)) - f(with_param(m, x, y, k, p0 - h))) / (2 * h);
      st.worst = std::max(st.worst, oracle::rel_err(fd, grad.at(x, y, k), 1e-6));
    }
    ++st.instances;
  };

  GradStats rg;
  for (int i = 0; i < 100; ++i) {
    const SvbrdfMaps m = random_maps(3, rng);
    const auto scenes = sample_loss_configs(1, rng);
    Image up(3, 3, 3);
    for (double& v : up.data()) v = rng.uniform(-1, 1);
    const auto proj = [&](const SvbrdfMaps& mm) {
      const Image r = render(mm, scenes[0]);
      double s = 0;
      for (size_t j = 0; j < r.size(); ++j) s += r.data()[j] * up.data()[j];
      return s;
    };
    check_maps(rg, m, render_grad(m, scenes[0], up), proj, 1e-6);
  }
  report("render_grad", rg, 1e-3);

  GradStats rl, tl;
  for (int i = 0; i < 100; ++i) {
    const SvbrdfMaps pred = random_maps(3, rng), gt = random_maps(3, rng);
    const auto configs = sample_loss_configs(3, rng);
    check_maps(rl, pred, render_loss(pred, gt, configs).grad,
               [&](const SvbrdfMaps& m) { return render_loss(m, gt, configs).value; }, 1e-6);
    check_maps(tl, pred, total_loss(pred, gt, configs, {}).grad,
               [&](const SvbrdfMaps& m) { return total_loss(m, gt, configs, {}).value; }, 1e-6);
  }
  report("render_loss", rl, 1e-3);
  report("total_loss", tl, 1e-3);

  GradStats nb;
  NetConfig toy;
  toy.input_size = 8;
  toy.depth = 2;
  toy.base_channels = 4;
  toy.global_dim = 6;
  toy.joint_channels = 5;
  for (int trial = 0; trial < 25; ++trial) {
    FusionNet net(toy, rng.next_u64());
    for (double& p : net.params()) p += rng.uniform(-0.05, 0.05);
    std::vector<Image> imgs(static_cast<size_t>(1 + trial % 3), Image(8, 8, 3));
    for (Image& im : imgs)
      for (double& v : im.data()) v = rng.uniform();
    Image up(8, 8, param::kCount);
    for (double& v : up.data()) v = rng.uniform(-1, 1);
    const std::vector<double> g = backward(net, imgs, up);
    const auto proj = [&] {
      const Image p = to_param_image(forward(net, imgs));
      double s = 0;
      for (size_t j = 0; j < p.size(); ++j) s += p.data()[j] * up.data()[j];
      return s;
    };
    for (int s = 0; s < 4; ++s) {
      const size_t i = size_t(rng.uniform_int(0, int(net.param_count()) - 1));
      const double p0 = net.params()[i], h = 1e-6;
      net.params()[i] = p0 + h;
      const double fp = proj();
      net.params()[i] = p0 - h;
      const double fm = proj();
      net.params()[i] = p0;
      nb.worst = std::max(nb.worst, oracle::rel_err((fp - fm) / (2 * h), g[i], 1e-5));
      ++nb.instances;
    }
  }
  report("net_backward", nb, 1e-3);
  return {ok, detail.str()};
}

Outcome loss_formula() {
  LossBreakdown parts;
  parts.render = 1.0;
  parts.maps = {0.5, 0.5, 0.5, 0.5};
  const double combined = combine_losses(parts, LossWeights{});
  Rng rng(303);
  const SvbrdfMaps gt = random_maps(8, rng);
  const double self = total_loss(gt, gt, sample_loss_configs(9, rng), {}).value;
  return {combined == 1.2 && self == 0.0, fmt("1.0 + 0.1*2.0 -> %.17g, total_loss(gt, gt) = %g", combined, self)};
}

Outcome order_invariance() {
  Rng rng(404);
  NetConfig cfg;
  cfg.input_size = 32;
  cfg.depth = 3;
  cfg.base_channels = 8;
  cfg.global_dim = 16;
  cfg.joint_channels = 16;
  long long perms = 0;
  int bad = 0;
  for (int draw = 0; draw < 100; ++draw) {
    FusionNet net(cfg, rng.next_u64());
    for (double& p : net.params()) p += rng.uniform(-0.05, 0.05);
    const int n = rng.uniform_int(2, 5);
    std::vector<Image> imgs(static_cast<size_t>(n), Image(32, 32, 3));
    for (Image& im : imgs)
      for (double& v : im.data()) v = rng.uniform();
    const SvbrdfMaps ref = forward(net, imgs);
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[size_t(i)] = i;
    while (std::next_permutation(order.begin(), order.end())) {
      std::vector<Image> p;
      for (int i : order) p.push_back(imgs[size_t(i)]);
      if (!(forward(net, p) == ref)) ++bad;
      ++perms;
    }
    std::vector<Image> dup = imgs;
    dup.push_back(imgs[size_t(rng.uniform_int(0, n - 1))]);
    if (!(forward(net, dup) == ref)) ++bad;
  }
  return {bad == 0, fmt("%.0f permutations + 100 duplications, %.0f mismatches", double(perms), bad)};
}

Outcome classical_recovery() {
  set_num_threads(1);
  TexelParams t;
  t.diffuse = Rgb{0.3};
  t.specular = Rgb{0.04};
  t.roughness = 0.4;
  const SvbrdfMaps gt(32, 32, t);
  GenConfig cfg;
  Rng rng(505);
  std::vector<CalibratedInput> inputs;
  for (int i = 0; i < 20; ++i) {
    const SceneSample s = sample_scene(cfg, rng);
    inputs.push_back({render(gt, s), s});
  }
  const OptimizeResult r = optimize(inputs, LossWeights{}, 5000);
  const double e_d = rmse(r.maps.diffuse, gt.diffuse), e_r = rmse(r.maps.roughness, gt.roughness);
  const double ratio = r.trace.back().objective / r.trace.front().objective;
  return {e_d < 0.02 && e_r < 0.05 && ratio < 0.1,
          fmt("RMSE diffuse %.4f (< 0.02), RMSE roughness %.4f (< 0.05), final/initial objective %.3f (< 0.1)", e_d,
              e_r, ratio)};
}

Outcome information_trend() {
  set_num_threads(1);
  const auto testset = procedural_library(3, 32, 606);
  EvalOptions opt;
  opt.ks = {1, 2, 4, 8};
  opt.seed = 607;
  LossWeights w;
  w.tv_weight = 0.2;
  OptimizeOptions oo;
  oo.hyper.lr = 0.01;
  const EvalReport rep = eval_curve([&](const auto& in) { return optimize(in, w, 1500, oo).maps; }, testset, opt);
  const auto curve = rep.curve(kRender, true);
  bool ok = true;
  std::string d = "mean rendering SSIM:";
  for (size_t i = 0; i < curve.size(); ++i) {
    d += fmt(" k=%.0f %.4f", curve[i].k, curve[i].mean);
    if (i > 0 && curve[i].mean < curve[i - 1].mean - 0.02) ok = false;
  }
  return {ok, d};
}

Outcome toy_training() {
  set_num_threads(1);
  GenConfig gc;
  gc.crop_size = 32;
  gc.seed = 707;
  const Generator gen(gc, procedural_library(2, 64, 708));
  NetConfig nc;
  nc.input_size = 32;
  FusionNet a(nc, 709), b(nc, 709);
  TrainOptions opts;
  opts.seed = 710;
  const auto ta = toy_train(a, gen, LossWeights{}, 200, opts);
  const auto tb = toy_train(b, gen, LossWeights{}, 200, opts);
  double first = 0, last = 0;
  for (int i = 0; i < 50; ++i) {
    first += ta[size_t(i)] / 50;
    last += ta[size_t(150 + i)] / 50;
  }
  const bool same = ta == tb && a.params() == b.params();
  return {last < first && same,
          fmt("mean loss first 50 %.4f, last 50 %.4f, rerun bit-identical %.0f", first, last, same ? 1 : 0)};
}

Outcome rectification() {
  Rng rng(808);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    std::array<Point2, 4> a, b;
    for (auto* q : {&a, &b}) {
      const double cx = rng.uniform(50, 500), cy = rng.uniform(50, 500), r = rng.uniform(20, 200);
      const double sx[4] = {-1, 1, 1, -1}, sy[4] = {-1, -1, 1, 1};
      for (int j = 0; j < 4; ++j)
        (*q)[size_t(j)] = {cx + r * (sx[j] + rng.uniform(-0.3, 0.3)), cy + r * (sy[j] + rng.uniform(-0.3, 0.3))};
    }
    const Homography h = solve_homography(a, b);
    for (int j = 0; j < 4; ++j) {
      const Point2 p = h.apply(a[size_t(j)]);
      worst = std::max(worst, std::hypot(p.x - b[size_t(j)].x, p.y - b[size_t(j)].y));
    }
  }
  // Tilted pinhole camera over a unit checkerboard on z = 0.
  Eigen::Matrix3d K;
  K << 800, 0, 320, 0, 800, 240, 0, 0, 1;
  const Eigen::Matrix3d R = (Eigen::AngleAxisd(0.4, Eigen::Vector3d::UnitX()) *
                             Eigen::AngleAxisd(-0.25, Eigen::Vector3d::UnitY()))
                                .toRotationMatrix();
  const Eigen::Vector3d T(-0.5, -0.4, 2.5);
  const auto project = [&](double X, double Y) {
    const Eigen::Vector3d p = K * (R * Eigen::Vector3d(X, Y, 0) + T);
    return Point2{p.x() / p.z(), p.y() / p.z()};
  };
  CornerSet c;
  c.pts = {project(0, 0), project(1, 0), project(1, 1), project(0, 1)};
  const Homography h = unit_square_to_quad(c), back = h.inverse();
  double board = 0;
  for (int y = 0; y <= 8; ++y)
    for (int x = 0; x <= 8; ++x) {
      const Point2 img = project(x / 8.0, y / 8.0);
      const Point2 fwd = h.apply({x / 8.0, y / 8.0});
      const Point2 rt = h.apply(back.apply(img));
      board = std::max({board, std::hypot(fwd.x - img.x, fwd.y - img.y), std::hypot(rt.x - img.x, rt.y - img.y)});
    }
  return {worst < 1e-9 && board < 1e-6,
          fmt("random-quad reprojection max %.2e px, checkerboard round trip max %.2e px", worst, board)};
}

Outcome ssim_checks() {
  Rng rng(909);
  Image x(32, 32, 3);
  for (double& v : x.data()) v = rng.uniform();
  const double self = ssim(x, x);
  const double c1 = 1e-4;
  const double consts = ssim(Image(32, 32, 1, 0.0), Image(32, 32, 1, 1.0));
  double worst = 0;
  for (int i = 0; i < 5; ++i) {
    Image a(32, 32, 3), b(32, 32, 3);
    for (double& v : a.data()) v = rng.uniform();
    for (double& v : b.data()) v = rng.uniform();
    worst = std::max(worst, std::abs(ssim(a, b) - oracle::ssim(a, b)));
  }
  return {self == 1.0 && std::abs(consts - c1 / (1 + c1)) < 1e-10 && worst < 1e-8,
          fmt("ssim(x,x) = %.17g, 0 vs 1 off by %.1e, brute-force max diff %.1e", self,
              std::abs(consts - c1 / (1 + c1)), worst)};
}

int run(const std::string& cmd) {
  const std::string full = cmd + " > /dev/null 2>&1";
  return std::system(full.c_str());
}

bool same_tree(const fs::path& a, const fs::path& b, int& files) {
  std::vector<fs::path> fa, fb;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb || fa.empty()) return false;
  for (const fs::path& p : fa)
    if (io::read_text(a / p) != io::read_text(b / p)) return false;
  files = int(fa.size());
  return true;
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / ("svbrdf_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string exe = SVBRDF_CLI;
  std::ostringstream detail;
  bool ok = true;
  for (const char* run_name : {"a", "b"}) {
    const fs::path r = root / run_name;
    const std::string g = exe + " --seed 7 --threads 1 --out ";
    const fs::path sample = r / "generate" / "sample_00000";
    const int codes[4] = {
        run(g + (r / "generate").string() +
            " generate --procedural 3 --procedural-size 32 --crop-size 32 --count 3"),
        run(g + (r / "render").string() + " render --material " + (sample / "gt").string() + " --scene " +
            (sample / "input_00.txt").string() + " --noise-sigma 0.01"),
        run(g + (r / "optimize").string() + " optimize --iters 50 --inputs " + sample.string()),
        run(g + (r / "net-train").string() +
            " net-train --procedural 2 --procedural-size 32 --input-size 32 --depth 2 --iters 5"),
    };
    for (int c : codes) ok = ok && c == 0;
  }
  for (const char* cmd : {"generate", "render", "optimize", "net-train"}) {
    int files = 0;
    const bool same = ok && same_tree(root / "a" / cmd, root / "b" / cmd, files);
    ok = ok && same;
    detail << cmd << (same ? " identical (" + std::to_string(files) + " files); " : " DIFFERS; ");
  }
  fs::remove_all(root);
  return {ok, detail.str()};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "BRDF oracle equivalence", 5, brdf_oracle},
    {2, "gradient suite", 120, gradient_suite},
    {3, "loss formula", 1e9, loss_formula},
    {4, "order invariance", 60, order_invariance},
    {5, "classical recovery", 600, classical_recovery},
    {6, "monotone information trend", 3600, information_trend},
    {7, "toy training descent", 900, toy_training},
    {8, "rectification", 5, rectification},
    {9, "SSIM", 1e9, ssim_checks},
    {10, "CLI determinism", 1e9, cli_determinism},
};

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) out.insert(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected, infeasible;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--known-infeasible" && i + 1 < argc) infeasible = parse_list(argv[++i]);
    else selected.insert(std::stoi(a));
  }
  set_num_threads(1);
  int failures = 0;
  for (const Criterion& c : kCriteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt >= c.limit_s) {
      o.pass = false;
      o.detail += fmt(" [over the %.0f s budget]", c.limit_s);
    }
    std::printf("criterion %2d %-27s %s  %s (%.1f s)%s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                dt, !o.pass && infeasible.count(c.id) ? " [known infeasible]" : "");
    std::fflush(stdout);
    if (!o.pass && !infeasible.count(c.id)) ++failures;
  }
  return failures;
}
