#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "svbrdf/svbrdf.hpp"

namespace fs = std::filesystem;
using namespace svbrdf;

namespace {

struct Globals {
  uint64_t seed = 0;
  int threads = int(std::max(1u, std::thread::hardware_concurrency()));
  std::string out = ".";
};

fs::path out_dir(const Globals& g) {
  const fs::path p(g.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) fail(ErrorKind::io, "cannot create output directory " + p.string());
  return p;
}

// ---------------------------------------------------------------------------
// Shared option groups

void add_gen_options(CLI::App* sub, GenConfig& g, bool with_crop) {
  const auto range = [&](const std::string& name, Range& r, const std::string& what) {
    sub->add_option("--" + name + "-min", r.lo, what + ", lower bound")->capture_default_str();
    sub->add_option("--" + name + "-max", r.hi, what + ", upper bound")->capture_default_str();
  };
  if (with_crop)
    sub->add_option("--crop-size", g.crop_size, "Crop side in texels")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--inputs-min", g.n_inputs_min, "Fewest photographs per sample")->capture_default_str();
  sub->add_option("--inputs-max", g.n_inputs_max, "Most photographs per sample")->capture_default_str();
  range("camera-distance", g.camera_distance, "Camera distance in plane widths");
  range("light-distance", g.light_distance, "Flash distance in plane widths");
  sub->add_option("--fov-jitter", g.fov_jitter_deg, "Field-of-view jitter in degrees")->capture_default_str();
  range("falloff", g.falloff, "Flash falloff exponent");
  range("intensity-scale", g.intensity_scale, "Log-uniform flash intensity multiplier");
  range("white-balance", g.white_balance, "Per-channel flash tint");
  sub->add_option("--ambient-probability", g.ambient_probability, "Chance of a second light")->capture_default_str();
  sub->add_option("--ambient-max-fraction", g.ambient_max_fraction, "Second light strength relative to the flash")
      ->capture_default_str();
  range("noise-sigma", g.noise_sigma, "Additive Gaussian noise");
  sub->add_flag("--clip,!--no-clip", g.clip, "Clip radiance to 1 before encoding")->capture_default_str();
  sub->add_option("--gamma", g.gamma, "Encoding gamma")->capture_default_str();
  sub->add_option("--quantize-bits", g.quantize_bits, "Quantization bit depth")->capture_default_str();
  range("augment-scale", g.augment_scale, "Log-uniform crop scale");
  sub->add_flag("--perturb,!--no-perturb", g.perturbations_enabled,
                "Random view and light placement (off: fixed fronto-parallel capture)")
      ->capture_default_str();
  sub->add_option("--mix-weight", g.mix_weight, "Fixed material mixing weight; negative draws one per sample")
      ->capture_default_str();
}

struct LibrarySource {
  std::string dir;
  int procedural = 0;
  int procedural_size = 128;
};

void add_library_options(CLI::App* sub, LibrarySource& s, const std::string& dir_flag, const std::string& what) {
  sub->add_option(dir_flag, s.dir, what + ": directory of material bundles");
  sub->add_option("--procedural", s.procedural, "Use this many procedural materials instead")->capture_default_str();
  sub->add_option("--procedural-size", s.procedural_size, "Side of each procedural material")
      ->capture_default_str()
      ->check(CLI::Range(2, 4096));
}

std::vector<SvbrdfMaps> load_library(const LibrarySource& s, uint64_t seed) {
  if (!s.dir.empty() && s.procedural > 0) fail(ErrorKind::usage, "give either a bundle directory or --procedural");
  if (s.procedural > 0) return procedural_library(s.procedural, s.procedural_size, seed);
  if (s.dir.empty()) fail(ErrorKind::usage, "no materials: give a bundle directory or --procedural N");
  std::vector<SvbrdfMaps> lib;
  for (const fs::path& p : io::list_bundles(s.dir)) lib.push_back(io::read_bundle(p));
  if (lib.empty()) fail(ErrorKind::usage, "no material bundles in " + s.dir);
  return lib;
}

void add_adam_options(CLI::App* sub, AdamHyper& h) {
  sub->add_option("--lr", h.lr, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--beta1", h.beta1, "Adam first-moment decay")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  sub->add_option("--beta2", h.beta2, "Adam second-moment decay")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  sub->add_option("--adam-eps", h.eps, "Adam denominator epsilon")->capture_default_str()->check(CLI::PositiveNumber);
}

// ---------------------------------------------------------------------------
// Input directories: every image.png / image.pfm, optionally with an
// image.txt scene sidecar. PFM is linear radiance and wins over PNG.

struct InputFile {
  fs::path image;
  fs::path scene;
  bool linear = false;
};

std::vector<InputFile> list_inputs(const fs::path& dir, bool need_scene) {
  if (!fs::is_directory(dir)) fail(ErrorKind::io, "not a directory: " + dir.string());
  std::map<std::string, InputFile> by_stem;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string ext = e.path().extension().string();
    if (ext != ".png" && ext != ".pfm") continue;
    InputFile& f = by_stem[e.path().stem().string()];
    if (f.image.empty() || ext == ".pfm") {
      f.image = e.path();
      f.linear = ext == ".pfm";
    }
  }
  std::vector<InputFile> out;
  for (auto& [stem, f] : by_stem) {
    f.scene = dir / (stem + ".txt");
    if (need_scene && !fs::exists(f.scene)) fail(ErrorKind::io, "missing scene sidecar " + f.scene.string());
    out.push_back(f);
  }
  if (out.empty()) fail(ErrorKind::io, "no input images in " + dir.string());
  return out;
}

RadianceImage load_linear(const InputFile& f, double gamma) {
  if (f.linear) {
    Image img = io::read_pfm(f.image);
    require(img.channels() == 3, "input " + f.image.string() + " must have 3 channels", ErrorKind::io);
    return RadianceImage(std::move(img));
  }
  return invert_gamma(io::read_png(f.image), gamma);
}

std::vector<CalibratedInput> load_calibrated(const fs::path& dir, double gamma) {
  std::vector<CalibratedInput> out;
  for (const InputFile& f : list_inputs(dir, true)) {
    CalibratedInput in{load_linear(f, gamma), io::read_scene(f.scene)};
    if (!f.linear) in.saturation = 1.0;
    out.push_back(std::move(in));
  }
  return out;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::string t = "iteration,objective,tv,render\n";
  for (const TraceRow& r : trace)
    t += std::to_string(r.iteration) + "," + io::format_double(r.objective) + "," + io::format_double(r.tv) + "," +
         io::format_double(r.render) + "\n";
  return t;
}

std::string numbered(const char* fmt, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, i);
  return buf;
}

// ---------------------------------------------------------------------------
// Commands

struct RenderArgs {
  std::string material, scene, name = "render";
  DegradeParams degrade;
};

void cmd_render(const Globals& g, const RenderArgs& a) {
  const SvbrdfMaps maps = io::read_bundle(a.material);
  const SceneSample scene = io::read_scene(a.scene);
  const RadianceImage r = render(maps, scene);
  DegradeParams dp = a.degrade;
  dp.seed = g.seed;
  const fs::path out = out_dir(g);
  io::write_pfm(out / (a.name + ".pfm"), r);
  io::write_png(out / (a.name + ".png"), degrade(r, dp));
  io::write_scene(out / (a.name + ".txt"), scene);
}

struct GenerateArgs {
  LibrarySource lib;
  GenConfig gen;
  int count = 10;
};

void cmd_generate(const Globals& g, GenerateArgs a) {
  a.gen.seed = derive_seed(g.seed, 1);
  const Generator gen(a.gen, load_library(a.lib, derive_seed(g.seed, 0)));
  const fs::path out = out_dir(g);
  io::write_text(out / "generator.txt", io::gen_config_to_text(gen.config()));
  for (int i = 0; i < a.count; ++i) {
    const TrainingSample s = gen.sample(uint64_t(i));
    const fs::path dir = out / numbered("sample_%05d", i);
    io::write_bundle(dir / "gt", s.gt);
    for (int k = 0; k < s.count(); ++k) {
      const std::string stem = numbered("input_%02d", k);
      io::write_png(dir / (stem + ".png"), s.inputs[size_t(k)].image);
      io::write_scene(dir / (stem + ".txt"), s.inputs[size_t(k)].scene);
    }
    io::write_text(dir / "sample.txt",
                   "first=" + std::to_string(s.first) + "\nsecond=" + std::to_string(s.second) +
                       "\nmix_weight=" + io::format_double(s.mix_weight) +
                       "\nrotation=" + io::format_double(s.augment.rotation) +
                       "\nscale=" + io::format_double(s.augment.scale) +
                       "\norigin_x=" + io::format_double(s.augment.origin_x) +
                       "\norigin_y=" + io::format_double(s.augment.origin_y) + "\n");
  }
}

struct OptimizeArgs {
  std::string inputs, init;
  int iters = 5000;
  int snapshot_every = 0;
  double gamma = 2.2;
  LossWeights weights;
  AdamHyper hyper;
};

void cmd_optimize(const Globals& g, const OptimizeArgs& a) {
  const std::vector<CalibratedInput> inputs = load_calibrated(a.inputs, a.gamma);
  const fs::path out = out_dir(g);
  OptimizeOptions opts;
  opts.hyper = a.hyper;
  if (a.snapshot_every > 0) {
    opts.callback_every = a.snapshot_every;
    opts.callback = [&](long long it, const SvbrdfMaps& m) {
      io::write_bundle(out / ("snapshot_" + std::to_string(it)), m);
    };
  }
  OptState start = init_state(inputs, a.hyper);
  if (!a.init.empty()) {
    const SvbrdfMaps init = io::read_bundle(a.init);
    require(init.width == start.u.width() && init.height == start.u.height(),
            "optimize: --init bundle size differs from the inputs", ErrorKind::usage);
    start.u = encode_params(init);
  }
  const OptimizeResult res = optimize_from(std::move(start), inputs, a.weights, a.iters, opts);
  io::write_bundle(out / "maps", res.maps);
  io::write_text(out / "loss.csv", trace_csv(res.trace));
}

struct RectifyArgs {
  std::string in, corners_file;
  std::vector<std::string> corners;
  int size = 256;
  double gamma = 2.2;
  bool linear = false;
};

Point2 parse_point(const std::string& s) {
  const auto pts = io::parse_corners(s + "\n0,0\n1,0\n1,1\n");
  return pts[0];
}

void cmd_rectify(const Globals& g, const RectifyArgs& a) {
  CornerSet c;
  c.target_size = a.size;
  if (!a.corners_file.empty() == !a.corners.empty())
    fail(ErrorKind::usage, "rectify: give exactly one of --corners FILE or four --corner x,y");
  if (!a.corners_file.empty()) {
    c.pts = io::read_corners(a.corners_file);
  } else {
    if (a.corners.size() != 4) fail(ErrorKind::usage, "rectify: need four --corner values (TL TR BR BL)");
    for (size_t i = 0; i < 4; ++i) c.pts[i] = parse_point(a.corners[i]);
  }
  const LdrImage photo = io::read_png(a.in);
  const Image rect = rectify(photo, c);
  // --out naming a .png file writes there; otherwise it is a directory.
  fs::path png = fs::path(g.out);
  if (png.extension() != ".png") png = out_dir(g) / "rectified.png";
  else if (png.has_parent_path()) fs::create_directories(png.parent_path());
  io::write_png(png, rect);
  if (a.linear) io::write_pfm(fs::path(png).replace_extension(".pfm"), invert_gamma(rect, a.gamma));
}

struct EvalArgs {
  LibrarySource lib;
  GenConfig gen;
  std::string predictor = "optimizer", checkpoint;
  std::vector<int> ks{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int n_render = 50;
  int iters = 1000;
  LossWeights weights;
  AdamHyper hyper;
};

void cmd_eval(const Globals& g, EvalArgs a) {
  const std::vector<SvbrdfMaps> testset = load_library(a.lib, derive_seed(g.seed, 0));
  Predictor predictor;
  std::optional<FusionNet> net;
  if (a.predictor == "optimizer") {
    predictor = [&](const std::vector<CalibratedInput>& in) {
      OptimizeOptions o;
      o.hyper = a.hyper;
      return optimize(in, a.weights, a.iters, o).maps;
    };
  } else if (a.predictor == "network") {
    if (a.checkpoint.empty()) fail(ErrorKind::usage, "eval: --predictor network needs --checkpoint");
    net = io::load_checkpoint(a.checkpoint);
    predictor = [&](const std::vector<CalibratedInput>& in) {
      std::vector<Image> imgs;
      for (const CalibratedInput& c : in) imgs.push_back(c.linear);
      return forward(*net, imgs);
    };
  } else if (a.predictor == "constant") {
    predictor = [](const std::vector<CalibratedInput>& in) {
      TexelParams t;
      t.diffuse = Rgb{0.5};
      t.specular = Rgb{0.04};
      t.roughness = 0.5;
      return SvbrdfMaps(in.front().linear.width(), in.front().linear.height(), t);
    };
  } else {
    fail(ErrorKind::usage, "eval: unknown predictor '" + a.predictor + "'");
  }
  EvalOptions opt;
  opt.ks = a.ks;
  opt.n_render = a.n_render;
  opt.gen = a.gen;
  opt.seed = derive_seed(g.seed, 1);
  const EvalReport rep = eval_curve(predictor, testset, opt);
  const fs::path out = out_dir(g);
  io::write_text(out / "eval.csv", io::eval_csv(rep));
  for (const auto& [stem, text] : io::eval_plot_data(rep)) io::write_text(out / ("plot_" + stem + ".csv"), text);
}

struct NetForwardArgs {
  std::string checkpoint, inputs;
  double gamma = 2.2;
};

void cmd_net_forward(const Globals& g, const NetForwardArgs& a) {
  const FusionNet net = io::load_checkpoint(a.checkpoint);
  std::vector<Image> imgs;
  for (const InputFile& f : list_inputs(a.inputs, false)) {
    Image img = load_linear(f, a.gamma);
    require(img.width() == net.config().input_size && img.height() == net.config().input_size,
            "net-forward: " + f.image.string() + " is not " + std::to_string(net.config().input_size) + "px square",
            ErrorKind::usage);
    imgs.push_back(std::move(img));
  }
  io::write_bundle(out_dir(g) / "maps", forward(net, imgs));
}

struct NetTrainArgs {
  LibrarySource lib;
  GenConfig gen;
  NetConfig net;
  LossWeights weights;
  AdamHyper hyper;
  std::string init;
  int iters = 200;
  int batch = 2;
};

void cmd_net_train(const Globals& g, NetTrainArgs a) {
  FusionNet net = a.init.empty() ? FusionNet(a.net, derive_seed(g.seed, 2)) : io::load_checkpoint(a.init);
  a.gen.crop_size = net.config().input_size;
  a.gen.seed = derive_seed(g.seed, 1);
  const Generator gen(a.gen, load_library(a.lib, derive_seed(g.seed, 0)));
  TrainOptions opts;
  opts.batch_size = a.batch;
  opts.hyper = a.hyper;
  opts.seed = derive_seed(g.seed, 3);
  const std::vector<double> trace = toy_train(net, gen, a.weights, a.iters, opts);
  const fs::path out = out_dir(g);
  io::save_checkpoint(out / "net.svfn", net);
  std::string csv = "iteration,loss\n";
  for (size_t i = 0; i < trace.size(); ++i) csv += std::to_string(i) + "," + io::format_double(trace[i]) + "\n";
  io::write_text(out / "train_loss.csv", csv);
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::usage:
    case ErrorKind::invalid_argument: return 2;
    case ErrorKind::io: return 3;
    case ErrorKind::numerical: return 4;
  }
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatially-varying BRDF capture toolkit: rendering, data synthesis, inverse optimization, "
               "multi-image fusion network, rectification and evaluation."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value file of flag values (a [command] section or command.key for command flags)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (1 is the reference serial path)")
      ->capture_default_str()
      ->check(CLI::Range(1, 1024));
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  RenderArgs ra;
  auto* render_cmd = app.add_subcommand("render", "Render a material bundle under one scene");
  render_cmd->add_option("--material", ra.material, "Material bundle directory")->required();
  render_cmd->add_option("--scene", ra.scene, "Scene sidecar file")->required();
  render_cmd->add_option("--name", ra.name, "Output file stem")->capture_default_str();
  render_cmd->add_option("--noise-sigma", ra.degrade.noise_sigma, "Gaussian noise on the PNG")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  render_cmd->add_flag("--clip,!--no-clip", ra.degrade.clip, "Clip radiance to 1")->capture_default_str();
  render_cmd->add_option("--gamma", ra.degrade.gamma, "PNG encoding gamma")->capture_default_str()->check(CLI::PositiveNumber);
  render_cmd->add_option("--quantize-bits", ra.degrade.quantize_bits, "Quantization bit depth before PNG storage")
      ->capture_default_str()
      ->check(CLI::Range(1, 16));

  GenerateArgs ga;
  auto* gen_cmd = app.add_subcommand("generate", "Write synthetic training samples");
  add_library_options(gen_cmd, ga.lib, "--library", "Base materials");
  gen_cmd->add_option("--count", ga.count, "Number of samples")->capture_default_str()->check(CLI::NonNegativeNumber);
  add_gen_options(gen_cmd, ga.gen, true);

  OptimizeArgs oa;
  auto* opt_cmd = app.add_subcommand("optimize", "Fit maps to calibrated photographs");
  opt_cmd->add_option("--inputs", oa.inputs, "Directory of images with scene sidecars")->required();
  opt_cmd->add_option("--init", oa.init, "Start from this bundle instead of the default initialization");
  opt_cmd->add_option("--iters", oa.iters, "Adam steps")->capture_default_str()->check(CLI::PositiveNumber);
  opt_cmd->add_option("--snapshot-every", oa.snapshot_every, "Write the current maps every N steps (0: never)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  opt_cmd->add_option("--gamma", oa.gamma, "Gamma used to linearize PNG inputs")->capture_default_str()->check(CLI::PositiveNumber);
  opt_cmd->add_option("--tv-weight", oa.weights.tv_weight, "Total-variation weight")->capture_default_str()->check(CLI::NonNegativeNumber);
  opt_cmd->add_option("--log-eps", oa.weights.log_eps, "Offset inside the log-l1 loss")->capture_default_str()->check(CLI::PositiveNumber);
  add_adam_options(opt_cmd, oa.hyper);

  RectifyArgs rca;
  auto* rect_cmd = app.add_subcommand("rectify", "Warp a framed photograph to a square crop");
  rect_cmd->add_option("--in", rca.in, "Photograph (PNG)")->required();
  rect_cmd->add_option("--corners", rca.corners_file, "Corner file, one x,y per line: TL TR BR BL");
  rect_cmd->add_option("--corner", rca.corners, "Corner x,y (repeat four times: TL TR BR BL)");
  rect_cmd->add_option("--size", rca.size, "Output side in pixels")->capture_default_str()->check(CLI::PositiveNumber);
  rect_cmd->add_flag("--linear", rca.linear, "Also write a linearized PFM");
  rect_cmd->add_option("--gamma", rca.gamma, "Gamma for --linear")->capture_default_str()->check(CLI::PositiveNumber);

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Prediction quality against the number of inputs");
  add_library_options(eval_cmd, ea.lib, "--testset", "Ground-truth materials");
  eval_cmd->add_option("--predictor", ea.predictor, "optimizer, network or constant")
      ->capture_default_str()
      ->check(CLI::IsMember({"optimizer", "network", "constant"}));
  eval_cmd->add_option("--checkpoint", ea.checkpoint, "Network weights for --predictor network");
  eval_cmd->add_option("--ks", ea.ks, "Input counts to evaluate")->capture_default_str()->delimiter(',');
  eval_cmd->add_option("--n-render", ea.n_render, "Re-rendering scenes per material")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--iters", ea.iters, "Optimizer steps per prediction")->capture_default_str()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--tv-weight", ea.weights.tv_weight, "Optimizer total-variation weight")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  add_adam_options(eval_cmd, ea.hyper);
  add_gen_options(eval_cmd, ea.gen, false);

  NetForwardArgs fa;
  auto* fwd_cmd = app.add_subcommand("net-forward", "Predict maps from any number of photographs");
  fwd_cmd->add_option("--checkpoint", fa.checkpoint, "Network weights")->required();
  fwd_cmd->add_option("--inputs", fa.inputs, "Directory of PNG or PFM images")->required();
  fwd_cmd->add_option("--gamma", fa.gamma, "Gamma used to linearize PNG inputs")->capture_default_str()->check(CLI::PositiveNumber);

  NetTrainArgs ta;
  auto* train_cmd = app.add_subcommand("net-train", "Train the fusion network on synthetic data");
  add_library_options(train_cmd, ta.lib, "--library", "Base materials");
  train_cmd->add_option("--init", ta.init, "Continue from this checkpoint");
  train_cmd->add_option("--iters", ta.iters, "Training iterations")->capture_default_str()->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--batch", ta.batch, "Samples per iteration")->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--input-size", ta.net.input_size, "Network input side")->capture_default_str();
  train_cmd->add_option("--depth", ta.net.depth, "Encoder levels")->capture_default_str();
  train_cmd->add_option("--base-channels", ta.net.base_channels, "Channels at the first level")->capture_default_str();
  train_cmd->add_option("--global-dim", ta.net.global_dim, "Global feature width")->capture_default_str();
  train_cmd->add_option("--joint-channels", ta.net.joint_channels, "Joint decoder width")->capture_default_str();
  train_cmd->add_option("--slope-scale", ta.net.slope_scale, "Largest predicted normal slope")->capture_default_str();
  train_cmd->add_option("--w-render", ta.weights.w_render, "Rendering loss weight")->capture_default_str()->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--w-map", ta.weights.w_map, "Weight of each map loss")->capture_default_str()->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--render-configs", ta.weights.n_render_configs, "Loss renderings per sample")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  add_adam_options(train_cmd, ta.hyper);
  add_gen_options(train_cmd, ta.gen, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    set_num_threads(g.threads);
    if (*render_cmd) cmd_render(g, ra);
    else if (*gen_cmd) cmd_generate(g, ga);
    else if (*opt_cmd) cmd_optimize(g, oa);
    else if (*rect_cmd) cmd_rectify(g, rca);
    else if (*eval_cmd) cmd_eval(g, ea);
    else if (*fwd_cmd) cmd_net_forward(g, fa);
    else if (*train_cmd) cmd_net_train(g, ta);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
