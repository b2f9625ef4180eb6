#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <openssl/evp.h>

#include "cli.hpp"
#include "cmvspec/gauge.hpp"
#include "cmvspec/operators.hpp"
#include "cmvspec/spectral.hpp"

#ifndef CMVSPEC_VERSION
#define CMVSPEC_VERSION "0.0.0"
#endif

namespace cmvspec::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using operators::Window;
using torus::Rational;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    char h[3];
    std::snprintf(h, sizeof h, "%02x", md[i]);
    hex += h;
  }
  return hex;
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Data files of one run plus the manifest that lists them.
class OutputSet {
public:
  explicit OutputSet(fs::path dir) : dir_{std::move(dir)} {
    std::error_code ec;
    if (!fs::is_directory(dir_, ec)) throw IoError("output directory " + dir_.string() + " does not exist");
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) throw IoError("cannot write " + p.string());
    files_.push_back(name);
  }

  void write_manifest(const RunOptions& opts, const json& config, int exit_code) {
    json m;
    m["tool"] = "cmvspec";
    m["version"] = CMVSPEC_VERSION;
    m["command"] = opts.command;
    if (!opts.verify_kind.empty()) m["kind"] = opts.verify_kind;
    m["exact"] = opts.exact;
    m["timestamp"] = utc_timestamp();
    m["exit_code"] = exit_code;
    m["config"] = config;
    json files = json::array();
    for (const auto& f : files_) {
      const fs::path p = dir_ / f;
      files.push_back({{"path", f}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
    }
    m["files"] = files;
    const fs::path p = dir_ / "manifest.json";
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << m.dump(2) << '\n';
    out.close();
    if (!out) throw IoError("cannot write " + p.string());
  }

private:
  fs::path dir_;
  std::vector<std::string> files_;
};

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  json detail = json::object();

  bool passed() const { return value <= tolerance; }
  json to_json() const {
    json j = detail;
    j["name"] = name;
    j["value"] = value;
    j["tolerance"] = tolerance;
    j["passed"] = passed();
    return j;
  }
};

Window centered_window(std::int64_t n) {
  if (n % 4 != 0) throw ConfigError("window must be a multiple of 4");
  return Window::centered(n);
}

torus::RationalTurn random_rational(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> den(2, 100000);
  const long q = den(rng);
  std::uniform_int_distribution<long> num(0, q - 1);
  return torus::RationalTurn(Rational(num(rng), q));
}

torus::TorusPoint<Rational> random_point(std::mt19937_64& rng, int d) {
  std::vector<torus::RationalTurn> c;
  for (int k = 0; k < d; ++k) c.push_back(random_rational(rng));
  return torus::TorusPoint<Rational>(c);
}

std::vector<Check> identity_checks(const ExperimentConfig& cfg) {
  std::vector<Check> out;
  std::mt19937_64 rng(cfg.seed);

  double bad = 0;
  for (std::int64_t n = -200; n <= 200; ++n)
    for (std::int64_t k = 1; k <= 12; ++k)
      if (!torus::pascal_holds(n, k)) ++bad;
  out.push_back({"pascal n in [-200,200], k in [1,12]", bad, 0.0});

  double bad_group = 0;
  double bad_step = 0;
  double bad_beta = 0;
  for (int d = 1; d <= 5; ++d) {
    const auto x = random_point(rng, d);
    const auto om = cfg.omega.exact ? *cfg.omega.exact : random_rational(rng);
    std::vector<torus::TorusPoint<Rational>> iter;
    for (std::int64_t n = -100; n <= 100; ++n) iter.push_back(torus::skew_iterate_closed(x, om, n));
    auto at = [&](std::int64_t n) -> const torus::TorusPoint<Rational>& {
      return iter[static_cast<std::size_t>(n + 100)];
    };
    for (std::int64_t n = -100; n <= 100; ++n) {
      if (n < 100 && torus::skew_step(at(n), om) != at(n + 1)) ++bad_step;
      for (std::int64_t m = -100; m <= 100; ++m) {
        if (n + m < -100 || n + m > 100) continue;
        if (torus::skew_iterate_closed(at(n), om, m) != at(n + m)) ++bad_group;
      }
    }
    if (d < 2) continue;
    model::SkewParams<Rational> p;
    p.d = d;
    p.omega = om;
    p.x = x;
    const auto psi = torus::psi_sequence(x, om, -101, 101);
    for (std::int64_t j = -100; j <= 100; ++j) {
      const auto b = gauge::beta_j(p.x_minus(), om, j - 1);
      const auto lhs = psi[static_cast<std::size_t>(j + 101)] - psi[static_cast<std::size_t>(j + 100)];
      if (lhs + b + b != torus::RationalTurn()) ++bad_beta;
    }
  }
  out.push_back({"skew group law d<=5 |n|<=100", bad_group, 0.0});
  out.push_back({"skew step consistency d<=5 |n|<=100", bad_step, 0.0});
  out.push_back({"psi difference equals -2 beta d in [2,5] |j|<=100", bad_beta, 0.0});
  return out;
}

template <class Number>
std::vector<Check> gauge_checks(const ExperimentConfig& cfg, const Window& w) {
  auto from_report = [](const gauge::ResidualReport& r) {
    return Check{r.identity, r.max_residual, r.tolerance, json::parse(gauge::to_json(r))};
  };
  if (cfg.model == ModelKind::cmv_skew) return {from_report(gauge::verify_section4(cfg.skew_params<Number>(), w))};
  try {
    return {from_report(gauge::verify_lemma1(cfg.walk_params<Number>(), w, cfg.convention))};
  } catch (const gauge::GaugeError& e) {
    const double r = e.residual() > 0.0 ? e.residual() : INFINITY;
    return {Check{"walk to electric CMV gauge", r, gauge::identity_tolerance, {{"error", e.what()}}}};
  }
}

template <class Number>
std::vector<Check> covariance_checks(const ExperimentConfig& cfg, const Window& w) {
  if (cfg.model == ModelKind::cmv_skew) throw ConfigError("verify covariance needs model walk or cmv-electric");
  const auto p = cfg.walk_params<Number>();
  auto p0 = p;
  p0.theta = torus::BasicTurn<Number>();
  const Complex ph = torus::phase(p.theta);
  const auto scaled = operators::transform(
      operators::build_walk(p0, w), [ph](std::int64_t, std::int64_t, Complex v) { return ph * v; }, "scaled");
  const double entry = operators::max_difference(operators::build_walk(p, w), scaled);
  const double spec = spectral::rotation_covariance_check(p, p.theta, cfg.block);
  return {Check{"walk rotation covariance entrywise", entry, 1e-15},
          Check{"walk rotation covariance eigenangles", spec, 1e-9, {{"block", cfg.block}}}};
}

template <class Number>
std::vector<Check> tau_checks(const ExperimentConfig& cfg, const Window& w) {
  if (cfg.model != ModelKind::cmv_skew) throw ConfigError("verify tau needs model cmv-skew");
  const auto p = cfg.skew_params<Number>();
  const auto tau = cfg.tau.as<Number>();
  return {Check{"tau shift covariance entrywise", gauge::tau_shift_covariance(p, tau, w), 1e-14},
          Check{"tau shift covariance eigenangles", spectral::tau_spectral_covariance(p, tau, cfg.block), 1e-9,
                {{"block", cfg.block}, {"expected_shift", -cfg.tau.value / 2.0}}}};
}

template <class Number>
std::vector<Check> run_verify(const std::string& kind, const ExperimentConfig& cfg) {
  if (kind == "identities") return identity_checks(cfg);
  const Window w = centered_window(cfg.window);
  if (kind == "gauge") return gauge_checks<Number>(cfg, w);
  if (kind == "covariance") return covariance_checks<Number>(cfg, w);
  if (kind == "tau") return tau_checks<Number>(cfg, w);
  throw ConfigError("verify kind must be gauge, identities, covariance or tau");
}

numerics::DenseMatrix compression(const ExperimentConfig& cfg, const AngleSpec& omega, std::int64_t n) {
  if (n < 8 || n % 4 != 0) throw ConfigError("block must be a multiple of 4 and at least 8");
  ExperimentConfig c = cfg;
  c.omega = omega;
  if (c.model == ModelKind::walk) {
    const std::int64_t sites = n / 2;
    const std::int64_t lo = -(sites / 2);
    return spectral::reflecting_compression(operators::walk_pattern(c.walk_params<double>()), lo, lo + sites);
  }
  const auto src = c.model == ModelKind::cmv_electric
                       ? model::VerblunskySource::electric(c.walk_params<double>(), c.convention)
                       : model::VerblunskySource::skew(c.skew_params<double>());
  const auto cuts = spectral::centered_cuts(n);
  return spectral::unitary_compression(src, cuts.lo, cuts.hi);
}

spectral::OperatorFactory factory_for(const ExperimentConfig& cfg) {
  switch (cfg.model) {
    case ModelKind::walk: {
      const auto p = cfg.walk_params<double>();
      return [p](const Window& w) { return operators::build_walk(p, w); };
    }
    case ModelKind::cmv_electric: {
      const auto src = model::VerblunskySource::electric(cfg.walk_params<double>(), cfg.convention);
      return [src](const Window& w) { return operators::build_cmv_product(src, w); };
    }
    case ModelKind::cmv_skew: {
      const auto p = cfg.skew_params<double>();
      p.validate();
      return [p](const Window& w) { return gauge::build_skew_cmv(p, w); };
    }
  }
  throw ConfigError("unknown model");
}

json gap_json(const spectral::EigenangleSet& s, const spectral::GapStats& g) {
  return {{"n", g.n},
          {"max_gap", g.max_gap},
          {"mean_gap", g.mean_gap},
          {"max_gap_start", g.max_gap_start},
          {"max_modulus_defect", s.max_modulus_defect},
          {"max_residual", s.max_residual},
          {"residual_tolerance", s.residual_tolerance}};
}

std::vector<AngleSpec> sweep_omegas(const RunOptions& opts, const ExperimentConfig& cfg) {
  std::vector<AngleSpec> raw;
  if (opts.omegas) {
    std::stringstream ss(*opts.omegas);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b == std::string::npos) continue;
      raw.push_back(AngleSpec::parse(std::string_view(item).substr(b, e - b + 1)));
    }
  } else {
    raw = cfg.omegas;
  }
  std::vector<AngleSpec> out;
  for (const auto& a : raw) {
    bool dup = false;
    for (const auto& o : out) dup = dup || o.value == a.value;
    if (dup) {
      std::cerr << "warning: duplicate omega '" << a.text << "' ignored\n";
      continue;
    }
    out.push_back(a);
  }
  if (out.empty()) throw ConfigError("sweep needs at least one omega (--omegas or config omegas)");
  return out;
}

int cmd_verify(const RunOptions& opts, const ExperimentConfig& cfg, OutputSet& out) {
  const auto checks =
      opts.exact ? run_verify<Rational>(opts.verify_kind, cfg) : run_verify<double>(opts.verify_kind, cfg);
  bool ok = true;
  json arr = json::array();
  for (const auto& c : checks) {
    ok = ok && c.passed();
    arr.push_back(c.to_json());
  }
  const json report = {{"kind", opts.verify_kind}, {"exact", opts.exact}, {"passed", ok}, {"checks", arr}};
  const std::string text = report.dump(2) + "\n";
  std::cout << text;
  out.write("verify_" + opts.verify_kind + ".json", text);
  return ok ? exit_ok : exit_verification_failed;
}

int cmd_spectrum(const ExperimentConfig& cfg, OutputSet& out) {
  const auto s = spectral::eigenangles(compression(cfg, cfg.omega, cfg.block));
  const auto g = spectral::gap_stats(s);
  std::string csv = "index,angle_turns\n";
  for (std::size_t i = 0; i < s.size(); ++i) csv += std::to_string(i) + "," + format_double(s.angles[i]) + "\n";
  out.write("eigenangles.csv", csv);
  out.write("gaps.json", gap_json(s, g).dump(2) + "\n");
  std::cout << "n=" << g.n << " max_gap=" << format_double(g.max_gap) << "\n";
  return exit_ok;
}

int cmd_certify(const RunOptions& opts, const ExperimentConfig& cfg, OutputSet& out) {
  const std::int64_t grid = opts.grid.value_or(256);
  if (grid < 8) throw ConfigError("grid must be at least 8");
  const Window w = centered_window(cfg.window);
  const auto recs = spectral::certify_grid(factory_for(cfg), static_cast<std::size_t>(grid), w, opts.threads);
  std::string csv = "z_angle_turns,window,sigma_min\n";
  double worst = 0.0;
  double worst_z = 0.0;
  for (const auto& r : recs) {
    csv += format_double(r.z_angle) + "," + std::to_string(r.window_size()) + "," + format_double(r.sigma_min) + "\n";
    if (r.sigma_min > worst) {
      worst = r.sigma_min;
      worst_z = r.z_angle;
    }
  }
  out.write("certify.csv", csv);
  out.write("certify.json", json{{"grid", grid},
                                 {"window", w.size()},
                                 {"max_sigma_min", worst},
                                 {"max_sigma_min_at", worst_z}}
                                    .dump(2) +
                                "\n");
  std::cout << "grid=" << grid << " window=" << w.size() << " max_sigma_min=" << format_double(worst) << "\n";
  return exit_ok;
}

int cmd_sweep(const RunOptions& opts, const ExperimentConfig& cfg, OutputSet& out) {
  const auto omegas = sweep_omegas(opts, cfg);
  const auto rows = spectral::omega_sweep<AngleSpec>(
      omegas, [&](const AngleSpec& om) { return compression(cfg, om, cfg.block); });
  std::string csv = "omega,angle_turns\n";
  std::string gaps = "omega,n,max_gap,mean_gap,max_gap_start\n";
  for (const auto& r : rows) {
    const std::string om = format_double(r.omega.value);
    for (double a : r.angles.angles) csv += om + "," + format_double(a) + "\n";
    gaps += om + "," + std::to_string(r.gaps.n) + "," + format_double(r.gaps.max_gap) + "," +
            format_double(r.gaps.mean_gap) + "," + format_double(r.gaps.max_gap_start) + "\n";
    std::cout << "omega=" << r.omega.text << " max_gap=" << format_double(r.gaps.max_gap) << "\n";
  }
  out.write("sweep.csv", csv);
  out.write("sweep_gaps.csv", gaps);
  return exit_ok;
}

}  // namespace

int run(const RunOptions& opts) {
  try {
    ExperimentConfig cfg = opts.config_path ? load_config(*opts.config_path) : parse_config(json::object());
    if (opts.window) cfg.window = *opts.window;
    if (opts.block) cfg.block = *opts.block;
    if (cfg.window <= 0 || cfg.block <= 0) throw ConfigError("window and block must be positive");
    OutputSet out(opts.out_dir);
    int code = exit_ok;
    if (opts.command == "verify") code = cmd_verify(opts, cfg, out);
    else if (opts.command == "spectrum") code = cmd_spectrum(cfg, out);
    else if (opts.command == "certify") code = cmd_certify(opts, cfg, out);
    else if (opts.command == "sweep") code = cmd_sweep(opts, cfg, out);
    else throw ConfigError("unknown command '" + opts.command + "'");
    out.write_manifest(opts, cfg.to_json(), code);
    return code;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_io;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return exit_verification_failed;
  }
}

}  // namespace cmvspec::cli
