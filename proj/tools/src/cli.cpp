#include "horseshoe/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "horseshoe/henon_map.hpp"
#include "horseshoe/homoclinic.hpp"
#include "horseshoe/horseshoe_cert.hpp"
#include "horseshoe/invariant_sets.hpp"
#include "horseshoe/periodic_orbits.hpp"
#include "horseshoe/symbolic.hpp"

namespace horseshoe::cli {

namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json complex_json(Complex z) { return format_complex(z); }
Json point_json(const Point2& z) { return Json::array({format_complex(z.x), format_complex(z.y)}); }

HenonMap make_map(const RunConfig& cfg) {
  if (!cfg.map.empty()) return HenonMap::parse(cfg.map);
  return HenonMap::normal_form(parse_complex(cfg.a), parse_complex(cfg.c), cfg.d);
}

double alpha_of(const RunConfig& cfg) { return cfg.alpha > 0.0 ? cfg.alpha : kDefaultAlpha; }

// Bidisc radius: explicit, else the inequality radius for the normal form,
// else just above the escape radius.
double radius_of(const RunConfig& cfg, const HenonMap& map) {
  if (cfg.R > 0.0) return cfg.R;
  if (map.is_normal_form() && map.degree() == 2) {
    return inequality_radius(std::abs(map.a()), std::abs(map.c()), alpha_of(cfg));
  }
  return escape_radius(map) * (1.0 + 1e-9);
}

int exit_for(Verdict v) {
  switch (v) {
    case Verdict::yes: return kExitYes;
    case Verdict::no: return kExitNo;
    case Verdict::unknown: return kExitUnknown;
  }
  return kExitUnknown;
}

// Writes to the named file, or to `fallback` when the name is empty.
void emit(const std::string& path, std::ostream& fallback, const std::string& bytes) {
  if (path.empty()) {
    fallback << bytes;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << bytes;
}

std::string with_config(Json body, const RunConfig& cfg) {
  body["config"] = Json::parse(config_json(cfg));
  return body.dump(2) + "\n";
}

std::string csv_with_config(const std::string& csv, const RunConfig& cfg) {
  return "# config " + config_json(cfg) + "\n" + csv;
}

// The config goes into a PPM comment line right after the magic number.
std::string ppm_with_config(const std::string& ppm, const RunConfig& cfg) {
  return ppm.substr(0, 3) + "# config " + config_json(cfg) + "\n" + ppm.substr(3);
}

Json certificate_json(Certificate cert, const RunConfig& cfg) {
  if (!cfg.timing) cert.wall_ms = 0.0;
  return Json::parse(cert.to_json());
}

int run_certify(const RunConfig& cfg, std::ostream& out) {
  const HenonMap map = make_map(cfg);
  Certificate cert;
  Json extra = Json::object();
  if (cfg.method == "inequality") {
    cert = certify_inequality(map, cfg.gamma, alpha_of(cfg));
  } else if (cfg.method == "optimize") {
    const ApertureResult r = optimize_aperture(map);
    cert = r.certificate;
    extra["threshold"] = r.threshold;
  } else if (cfg.method == "cone-sweep") {
    const Bidisc B = Bidisc::square(radius_of(cfg, map));
    cert = certify_cone_sweep(map, B, ConeField(cfg.gamma), {cfg.depth, 64});
  } else if (cfg.method == "component-count") {
    const double R = radius_of(cfg, map);
    const HenonSystem system(map, Bidisc::square(R));
    ComponentCountOptions opts;
    opts.resolution = cfg.resolution;
    opts.workers = cfg.workers;
    const ComponentCount cc = component_count(system, Direction::fwd, opts);
    cert.method = CertMethod::component_count;
    cert.map = map.descriptor();
    cert.R = R;
    cert.alpha = alpha_of(cfg);
    cert.gamma = cfg.gamma;
    cert.work.boxes = static_cast<long>(cc.slices.size());
    cert.verdict = !cc.aggregate ? Verdict::unknown : (*cc.aggregate == map.degree() ? Verdict::yes : Verdict::no);
    Json counts = Json::array();
    for (const SliceCount& s : cc.slices) counts.push_back(s.count);
    extra["slice_counts"] = counts;
  } else {
    throw UsageError("certify: unknown --method " + cfg.method);
  }
  Json body = certificate_json(cert, cfg);
  for (auto& [key, value] : extra.items()) body[key] = value;
  emit(cfg.out, out, with_config(body, cfg));
  return exit_for(cert.verdict);
}

int run_cycles(const RunConfig& cfg, std::ostream& out) {
  std::ostringstream csv;
  write_cycles_csv(csv, cfg.d, cfg.max_period);
  emit(cfg.out, out, csv_with_config(csv.str(), cfg));
  return kExitYes;
}

int run_enumerate(const RunConfig& cfg, std::ostream& out) {
  const HenonMap map = make_map(cfg);
  EnumerationOptions opts;
  opts.grid = cfg.grid;
  opts.tol = cfg.tol;
  opts.workers = cfg.workers;
  const Enumeration e = enumerate_periodic(map, cfg.period, Bidisc::square(radius_of(cfg, map)), opts);
  std::ostringstream csv;
  write_periodic_csv(csv, e);
  emit(cfg.out, out, csv_with_config(csv.str(), cfg));
  return kExitYes;
}

int run_itinerary(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const HenonMap map = make_map(cfg);
  const HenonSystem system(map, Bidisc::square(radius_of(cfg, map)));
  const ComponentLabeling labeling = build_labeling(system, cfg.resolution);
  const int back = cfg.back >= 0 ? cfg.back : cfg.depth / 2;
  const int fwd = cfg.fwd >= 0 ? cfg.fwd : cfg.depth / 2;
  const Point2 z{parse_complex(cfg.x), parse_complex(cfg.y)};
  Json body;
  int code = kExitYes;
  try {
    const SymbolWord word = itinerary(system, labeling, z, back, fwd);
    body["itinerary"] = word.to_string();
    out << word.to_string() << "\n";
  } catch (const NotInKError& e) {
    body["itinerary"] = nullptr;
    body["error"] = e.what();
    err << e.what() << "\n";
    code = kExitNo;
  } catch (const UnresolvedSymbolError& e) {
    body["itinerary"] = nullptr;
    body["error"] = e.what();
    err << e.what() << "\n";
    code = kExitUnknown;
  }
  if (!cfg.out.empty()) emit(cfg.out, out, with_config(body, cfg));
  return code;
}

SlicePlane plane_of(const std::string& name) {
  if (name == "fix-y") return SlicePlane::fix_y;
  if (name == "fix-x") return SlicePlane::fix_x;
  if (name == "real") return SlicePlane::real_plane;
  throw UsageError("slice: --plane must be fix-y, fix-x or real");
}

int run_slice(const RunConfig& cfg, std::ostream& out) {
  const HenonMap map = make_map(cfg);
  const double R = radius_of(cfg, map);
  SliceSpec spec;
  spec.plane = plane_of(cfg.plane);
  spec.fixed = parse_complex(cfg.fixed);
  spec.window = PlaneWindow::around(parse_complex(cfg.center), cfg.radius > 0.0 ? cfg.radius : R, cfg.resolution);
  const SliceRaster raster = render_slice(map, spec, R, cfg.horizon, cfg.workers);
  std::ostringstream ppm;
  write_ppm(ppm, raster);
  emit(cfg.out.empty() ? cfg.ppm : cfg.out, out, ppm_with_config(ppm.str(), cfg));
  if (!cfg.csv.empty()) {
    std::ostringstream csv;
    write_csv(csv, raster);
    emit(cfg.csv, out, csv_with_config(csv.str(), cfg));
  }
  return kExitYes;
}

int run_decay(const RunConfig& cfg, std::ostream& out) {
  const HenonMap map = make_map(cfg);
  const HenonSystem system(map, Bidisc::square(radius_of(cfg, map)));
  FiberDecayOptions opts;
  opts.resolution = cfg.resolution;
  opts.workers = cfg.workers;
  const FiberDecay fd = fiber_diameter_decay(system, cfg.depth, opts);
  std::ostringstream csv;
  csv << "depth,diameter,components\n";
  for (std::size_t i = 0; i < fd.diameters.size(); ++i) {
    csv << i + 1 << ',' << format_double(fd.diameters[i]) << ','
        << (i < fd.component_counts.size() ? fd.component_counts[i] : -1) << '\n';
  }
  emit(cfg.out, out, csv_with_config(csv.str(), cfg));
  return fd.truncated ? kExitUnknown : kExitYes;
}

// Real-slice picture: escape classes, W^u (red), W^s (yellow), the chart
// outline (green) and q (white).
std::string homoclinic_overlay(const RunConfig& cfg, const HenonMap& map, const SaddleData& saddle,
                               const HomoclinicPoint& q, const HorseshoeResult* hs) {
  const double R = escape_radius(map) * 1.05;
  SliceSpec spec;
  spec.plane = SlicePlane::real_plane;
  spec.window = PlaneWindow::around(0.0, R, cfg.resolution);
  const SliceRaster raster = render_slice(map, spec, R, cfg.horizon, cfg.workers);
  const int w = spec.window.width;
  const int h = spec.window.height;
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (int row = 0; row < h; ++row) {
    for (int i = 0; i < w; ++i) {
      const auto px = orbit_color(raster.at(i, h - 1 - row));
      std::copy(px.begin(), px.end(), rgb.begin() + 3 * (static_cast<std::ptrdiff_t>(row) * w + i));
    }
  }
  auto plot = [&](const Point2& z, std::array<std::uint8_t, 3> color, int half) {
    if (!z.finite()) return;
    const int i = static_cast<int>(std::floor((z.x.real() - spec.window.re_lo) / spec.window.dx()));
    const int j = static_cast<int>(std::floor((z.y.real() - spec.window.im_lo) / spec.window.dy()));
    for (int di = -half; di <= half; ++di) {
      for (int dj = -half; dj <= half; ++dj) {
        const int ii = i + di;
        const int row = h - 1 - (j + dj);
        if (ii < 0 || ii >= w || row < 0 || row >= h) continue;
        std::copy(color.begin(), color.end(), rgb.begin() + 3 * (static_cast<std::ptrdiff_t>(row) * w + ii));
      }
    }
  };
  const ManifoldParam wu = parametrize_manifold(map, saddle, ManifoldKind::unstable, cfg.order);
  const ManifoldParam ws = parametrize_manifold(map, saddle, ManifoldKind::stable, cfg.order);
  const int samples = 20 * cfg.resolution;
  for (int s = -samples; s <= samples; ++s) {
    const double t = 0.9 * static_cast<double>(s) / samples;
    Point2 zu = wu(t * wu.valid_radius);
    Point2 zs = ws(t * ws.valid_radius);
    for (int j = 0; j <= q.iterate + 1; ++j) {
      plot(zu, {220, 40, 40}, 0);
      plot(zs, {255, 220, 0}, 0);
      for (int r = 0; r < saddle.period; ++r) {
        zu = map.step(zu);
        zs = map.step_inverse(zs);
      }
    }
  }
  if (hs && hs->system) {
    for (int s = 0; s < 4 * cfg.resolution; ++s) {
      const double t = -1.0 + 2.0 * s / (4.0 * cfg.resolution);
      for (const Point2& z : {Point2{t, -1.0}, Point2{t, 1.0}, Point2{-1.0, t}, Point2{1.0, t}}) {
        plot(hs->system->to_space(z), {40, 200, 60}, 0);
      }
    }
  }
  plot(q.q, {255, 255, 255}, 2);
  std::ostringstream ppm;
  write_ppm(ppm, w, h, rgb);
  return ppm.str();
}

int run_homoclinic(const RunConfig& cfg, std::ostream& out) {
  const HenonMap map = make_map(cfg);
  const std::vector<SaddleData> saddles = find_saddles(map, cfg.k);
  if (cfg.saddle < 0 || cfg.saddle >= static_cast<int>(saddles.size())) {
    throw UsageError("homoclinic: --saddle out of range (" + std::to_string(saddles.size()) + " saddles of period " +
                     std::to_string(cfg.k) + ")");
  }
  const SaddleData& saddle = saddles[static_cast<std::size_t>(cfg.saddle)];
  HomoclinicSearch search;
  search.order = cfg.order;
  const HomoclinicPoint q = find_homoclinic(map, saddle, true, search);
  HorseshoeOptions opts;
  opts.order = cfg.order;
  opts.resolution = cfg.resolution;
  const HorseshoeResult hs = build_horseshoe(map, saddle, q, cfg.d, opts);

  Json body;
  body["saddle"] = {{"p", point_json(saddle.p)},
                    {"period", saddle.period},
                    {"mu", complex_json(saddle.mu)},
                    {"lambda", complex_json(saddle.lambda)}};
  body["q"] = {{"point", point_json(q.q)}, {"t_u", q.t_u}, {"iterate", q.iterate}, {"t_s", q.t_s}};
  body["angle"] = q.transversality_angle;
  body["N"] = hs.N;
  body["chart"] = {{"center", point_json(hs.chart.center)},
                   {"frame_u", point_json(hs.chart.frame_u)},
                   {"frame_s", point_json(hs.chart.frame_s)},
                   {"r_u", hs.chart.r_u},
                   {"r_s", hs.chart.r_s},
                   {"n", hs.n},
                   {"m", hs.m}};
  Json cert = certificate_json(hs.certificate, cfg);
  cert["cone_margin"] = hs.cone_margin;
  cert["boundary_margin"] = hs.boundary_margin;
  cert["components"] = hs.count.aggregate ? Json(*hs.count.aggregate) : Json(nullptr);
  cert["diagnostics"] = hs.diagnostics;
  body["certificate"] = cert;
  emit(cfg.out, out, with_config(body, cfg));
  if (!cfg.ppm.empty()) emit(cfg.ppm, out, ppm_with_config(homoclinic_overlay(cfg, map, saddle, q, &hs), cfg));
  return exit_for(hs.certificate.verdict);
}

void check_budgets(const RunConfig& cfg) {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw UsageError(std::string("--") + name + " must be positive");
  };
  positive(cfg.horizon, "horizon");
  positive(cfg.depth, "depth");
  positive(cfg.resolution, "resolution");
  positive(cfg.grid, "grid");
  positive(cfg.order, "order");
  positive(cfg.d, "d");
  positive(cfg.max_period, "max-period");
  positive(cfg.period, "period");
  positive(cfg.k, "k");
  if (!(cfg.tol > 0.0)) throw UsageError("--tol must be positive");
  if (!(cfg.gamma > 0.0)) throw UsageError("--gamma must be positive");
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--map", cfg.map, "Map descriptor, e.g. 'henon d=2 a=1+0i c=-10+0i'");
  sub->add_option("--a", cfg.a, "Jacobian parameter a (re+imi)")->capture_default_str();
  sub->add_option("--c", cfg.c, "Constant c (re+imi)")->capture_default_str();
  sub->add_option("--d", cfg.d, "Degree")->capture_default_str();
  sub->add_option("--R", cfg.R, "Bidisc radius (0: from the map)")->capture_default_str();
  sub->add_option("--alpha", cfg.alpha, "Radius factor alpha (0: default)")->capture_default_str();
  sub->add_option("--gamma", cfg.gamma, "Cone aperture")->capture_default_str();
  sub->add_option("--horizon", cfg.horizon, "Escape-time horizon")->capture_default_str();
  sub->add_option("--depth", cfg.depth, "Depth budget")->capture_default_str();
  sub->add_option("--resolution", cfg.resolution, "Raster resolution")->capture_default_str();
  sub->add_option("--grid", cfg.grid, "Newton seed grid")->capture_default_str();
  sub->add_option("--order", cfg.order, "Manifold series order")->capture_default_str();
  sub->add_option("--tol", cfg.tol, "Tolerance")->capture_default_str();
  sub->add_option("--out", cfg.out, "Output file (default stdout)");
  sub->add_option("--seed", cfg.seed, "Seed for sampled quantities")->capture_default_str();
  sub->add_option("--workers", cfg.workers, "Worker threads (0: HORSESHOE_WORKERS or all cores)");
  sub->add_flag("--timing", cfg.timing, "Record wall-clock times in artifacts");
}

}  // namespace

std::string config_json(const RunConfig& cfg) {
  Json j;
  j["subcommand"] = cfg.subcommand;
  j["map"] = cfg.map;
  j["a"] = cfg.a;
  j["c"] = cfg.c;
  j["d"] = cfg.d;
  j["horizon"] = cfg.horizon;
  j["depth"] = cfg.depth;
  j["resolution"] = cfg.resolution;
  j["grid"] = cfg.grid;
  j["order"] = cfg.order;
  j["tol"] = cfg.tol;
  j["alpha"] = cfg.alpha;
  j["gamma"] = cfg.gamma;
  j["R"] = cfg.R;
  j["method"] = cfg.method;
  j["max_period"] = cfg.max_period;
  j["period"] = cfg.period;
  j["k"] = cfg.k;
  j["saddle"] = cfg.saddle;
  j["x"] = cfg.x;
  j["y"] = cfg.y;
  j["back"] = cfg.back;
  j["fwd"] = cfg.fwd;
  j["plane"] = cfg.plane;
  j["fixed"] = cfg.fixed;
  j["center"] = cfg.center;
  j["radius"] = cfg.radius;
  j["out"] = cfg.out;
  j["csv"] = cfg.csv;
  j["ppm"] = cfg.ppm;
  j["seed"] = cfg.seed;
  j["timing"] = cfg.timing;
  return j.dump();
}

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    check_budgets(cfg);
    if (cfg.subcommand == "certify") return run_certify(cfg, out);
    if (cfg.subcommand == "cycles") return run_cycles(cfg, out);
    if (cfg.subcommand == "enumerate") return run_enumerate(cfg, out);
    if (cfg.subcommand == "itinerary") return run_itinerary(cfg, out, err);
    if (cfg.subcommand == "slice") return run_slice(cfg, out);
    if (cfg.subcommand == "homoclinic") return run_homoclinic(cfg, out);
    if (cfg.subcommand == "decay") return run_decay(cfg, out);
    throw UsageError("unknown subcommand '" + cfg.subcommand + "'");
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "inconclusive: " << e.what() << "\n";
    return kExitUnknown;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Complex Hénon horseshoes: certificates, cycles, symbolic coding, homoclinic construction",
               "horseshoe"};
  app.require_subcommand(1, 1);
  app.set_help_flag("--help", "Print this help message and exit");

  auto* certify = app.add_subcommand("certify", "Horseshoe certificate (JSON); exit 0 yes, 1 no, 2 unknown");
  add_common(certify, cfg);
  certify->add_option("--method", cfg.method, "inequality | optimize | cone-sweep | component-count")
      ->capture_default_str();

  auto* cycles = app.add_subcommand("cycles", "Periodic point and cycle counts of the shift (CSV)");
  add_common(cycles, cfg);
  cycles->add_option("--max-period", cfg.max_period, "Largest period")->capture_default_str();

  auto* enumerate = app.add_subcommand("enumerate", "Points of period dividing --period (CSV)");
  add_common(enumerate, cfg);
  enumerate->add_option("--period", cfg.period, "Period n")->capture_default_str();

  auto* itin = app.add_subcommand("itinerary", "Symbol word of a point, caret at index 0");
  add_common(itin, cfg);
  itin->add_option("--x", cfg.x, "x coordinate (re+imi)")->capture_default_str();
  itin->add_option("--y", cfg.y, "y coordinate (re+imi)")->capture_default_str();
  itin->add_option("--back", cfg.back, "Symbols before index 0 (default depth/2)");
  itin->add_option("--fwd", cfg.fwd, "Symbols after index 0 (default depth/2)");

  auto* slice = app.add_subcommand("slice", "Escape-time slice (PPM, optional CSV)");
  add_common(slice, cfg);
  slice->add_option("--plane", cfg.plane, "fix-y | fix-x | real")->capture_default_str();
  slice->add_option("--fixed", cfg.fixed, "Frozen coordinate (re+imi)")->capture_default_str();
  slice->add_option("--center", cfg.center, "Window center (re+imi)")->capture_default_str();
  slice->add_option("--radius", cfg.radius, "Window half-width (0: R)")->capture_default_str();
  slice->add_option("--csv", cfg.csv, "Classification dump");
  slice->add_option("--ppm", cfg.ppm, "Image path (same as --out)");

  auto* homoclinic = app.add_subcommand("homoclinic", "Transverse homoclinic point and horseshoe chart (JSON)");
  add_common(homoclinic, cfg);
  homoclinic->add_option("--k", cfg.k, "Saddle period")->capture_default_str();
  homoclinic->add_option("--saddle", cfg.saddle, "Index among saddles, most unstable first")->capture_default_str();
  homoclinic->add_option("--ppm", cfg.ppm, "Real-slice overlay image");

  auto* decay = app.add_subcommand("decay", "Fiber diameters of n-fold intersections (CSV)");
  add_common(decay, cfg);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (app.exit(e, out, err) == 0) return kExitYes;
    err << "\n" << app.help();
    return kExitUsage;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->parsed()) cfg.subcommand = sub->get_name();
  }
  return dispatch(cfg, out, err);
}

}  // namespace horseshoe::cli
