#include "ekfloc/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "ekfloc/evaluation.hpp"
#include "ekfloc/pipeline.hpp"
#include "ekfloc/run_config.hpp"
#include "ekfloc/svg_plot.hpp"

namespace ekfloc {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config = "default";
  std::uint64_t seed = 0;
  std::string out;
};

void add_common(CLI::App& cmd, CommonOptions& opts, bool out_required, const std::string& out_help) {
  cmd.add_option("--config", opts.config, "Run config file, or 'default'");
  cmd.add_option("--seed", opts.seed, "Random seed");
  auto* o = cmd.add_option("--out", opts.out, out_help);
  if (out_required) {
    o->required();
  }
}

// Poses from either a fused trajectory (kind "estimate") or a sensor log
// carrying truth records.
std::vector<TimedPose> read_poses(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  std::string first;
  while (std::getline(in, first) && first.find_first_not_of(" \t\r") == std::string::npos) {
  }
  bool estimates = false;
  if (!first.empty()) {
    try {
      const auto j = nlohmann::json::parse(first);
      estimates = j.is_object() && j.value("kind", "") == "estimate";
    } catch (const nlohmann::json::exception&) {
      // read_log reports the malformed line below.
    }
  }
  if (estimates) {
    return estimate_poses(read_trajectory(path));
  }
  std::vector<TimedPose> poses = truth_poses(read_log(path));
  if (poses.empty()) {
    throw std::runtime_error(path.string() + " holds neither estimates nor truth records");
  }
  return poses;
}

int cmd_sim(const CommonOptions& opts, std::ostream& out) {
  const RunConfig config = load_run_config(opts.config);
  const SensorLog log = simulate_run(config, opts.seed);
  fs::create_directories(opts.out);
  write_log(log, fs::path(opts.out) / "log.jsonl");
  std::ofstream cfg(fs::path(opts.out) / "config.json");
  cfg << dump_run_config(config);
  if (!cfg) {
    throw std::runtime_error("cannot write config.json");
  }
  out << "wrote " << log.records.size() << " records to " << (fs::path(opts.out) / "log.jsonl").string()
      << '\n';
  return 0;
}

int cmd_fuse(const CommonOptions& opts, const std::string& log_path, std::ostream& out) {
  const RunConfig config = load_run_config(opts.config);
  const SensorLog log = read_log(fs::path(log_path));
  const std::vector<FilterStep> steps = fuse_log(log, config.filter);
  const fs::path target(opts.out);
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path());
  }
  write_trajectory(steps, target);
  std::size_t rejected = 0;
  for (const FilterStep& s : steps) {
    rejected += s.accepted ? 0 : 1;
  }
  out << "fused " << steps.size() << " measurements (" << rejected << " gated) into "
      << target.string() << '\n';
  return 0;
}

int cmd_eval(const CommonOptions& opts, const std::string& truth_path,
             const std::string& estimate_path, std::ostream& out) {
  const EvalReport report = evaluate(read_poses(truth_path), read_poses(estimate_path));
  const std::string text = report_json(report);
  out << text << '\n';
  if (!opts.out.empty()) {
    std::ofstream file(opts.out);
    file << text << '\n';
    if (!file) {
      throw std::runtime_error("cannot write " + opts.out);
    }
  }
  return 0;
}

int cmd_plot(const CommonOptions& opts, const std::string& truth_path,
             const std::string& estimate_path, std::ostream& out) {
  const std::vector<TimedPose> ref = read_poses(truth_path);
  const std::vector<TimedPose> est = read_poses(estimate_path);
  const EvalReport report = evaluate(ref, est);
  fs::create_directories(opts.out);
  const fs::path dir(opts.out);

  auto xy = [](const std::vector<TimedPose>& ps, const std::string& label, const std::string& color) {
    PlotSeries s{label, color, {}, {}};
    for (const TimedPose& p : ps) {
      s.x.push_back(p.pose.x());
      s.y.push_back(p.pose.y());
    }
    return s;
  };
  write_svg({"Trajectory", "x [m]", "y [m]",
             {xy(ref, "reference", "#1f77b4"), xy(est, "estimate", "#d62728")}, true},
            dir / "trajectory.svg");

  auto heading = [](const std::vector<TimedPose>& ps, const std::string& label,
                    const std::string& color) {
    PlotSeries s{label, color, {}, {}};
    for (const TimedPose& p : ps) {
      s.x.push_back(p.t);
      s.y.push_back(rad_to_deg(p.pose.theta()));
    }
    return s;
  };
  write_svg({"Heading", "t [s]", "heading [deg]",
             {heading(ref, "reference", "#1f77b4"), heading(est, "estimate", "#d62728")}},
            dir / "heading.svg");

  PlotSeries ex{"x error", "#2ca02c", {}, {}};
  PlotSeries ey{"y error", "#9467bd", {}, {}};
  PlotSeries eth{"heading error", "#ff7f0e", {}, {}};
  for (const ErrorSample& e : report.series) {
    ex.x.push_back(e.t);
    ex.y.push_back(e.ex);
    ey.x.push_back(e.t);
    ey.y.push_back(e.ey);
    eth.x.push_back(e.t);
    eth.y.push_back(rad_to_deg(e.etheta));
  }
  write_svg({"Position error along x", "t [s]", "error [m]", {ex}}, dir / "error_x.svg");
  write_svg({"Position error along y", "t [s]", "error [m]", {ey}}, dir / "error_y.svg");
  write_svg({"Heading error", "t [s]", "error [deg]", {eth}}, dir / "error_heading.svg");
  out << "wrote 5 charts to " << dir.string() << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"2D EKF localization toolkit: simulate, fuse, evaluate, plot", "ekfloc"};
  app.require_subcommand(1);

  CommonOptions sim_opts;
  auto* sim = app.add_subcommand("sim", "Simulate ground truth and sensor logs");
  add_common(*sim, sim_opts, true, "Output directory");

  CommonOptions fuse_opts;
  std::string fuse_log_path;
  auto* fuse = app.add_subcommand("fuse", "Run the EKF over a sensor log");
  add_common(*fuse, fuse_opts, true, "Fused trajectory file (JSONL)");
  fuse->add_option("--log", fuse_log_path, "Sensor log (JSONL)")->required();

  CommonOptions eval_opts;
  std::string eval_truth;
  std::string eval_est;
  auto* eval = app.add_subcommand("eval", "RMSE and max errors of an estimate against truth");
  add_common(*eval, eval_opts, false, "Also write the report to this file");
  eval->add_option("--truth", eval_truth, "Log with truth records")->required();
  eval->add_option("--estimate", eval_est, "Fused trajectory or truth log")->required();

  CommonOptions plot_opts;
  std::string plot_truth;
  std::string plot_est;
  auto* plot = app.add_subcommand("plot", "SVG charts of trajectory and errors");
  add_common(*plot, plot_opts, true, "Output directory");
  plot->add_option("--truth", plot_truth, "Log with truth records")->required();
  plot->add_option("--estimate", plot_est, "Fused trajectory or truth log")->required();

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("ekfloc");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_storage) {
    argv.push_back(a.data());
  }

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*sim) {
      return cmd_sim(sim_opts, err);
    }
    if (*fuse) {
      return cmd_fuse(fuse_opts, fuse_log_path, err);
    }
    if (*eval) {
      return cmd_eval(eval_opts, eval_truth, eval_est, out);
    }
    if (*plot) {
      return cmd_plot(plot_opts, plot_truth, plot_est, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace ekfloc
