// Copyright 2026 The cuboidlift Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cuboidlift/cli.hpp"

#include "cuboidlift/error.hpp"
#include "cuboidlift/fusion.hpp"
#include "cuboidlift/metrics.hpp"
#include "cuboidlift/parallel.hpp"
#include "cuboidlift/pseudolabel.hpp"
#include "cuboidlift/report_io.hpp"
#include "cuboidlift/scene_io.hpp"
#include "cuboidlift/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <iomanip>
#include <ostream>

extern char ** environ;

namespace cuboidlift::cli
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

json parse_value(const std::string & text)
{
  try {
    return json::parse(text);
  } catch (const json::parse_error &) {
    return json(text);
  }
}

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

void set_path(json & root, const std::string & section, const std::string & key, const json & value,
              const std::string & origin)
{
  if (section.empty() || key.empty()) throw ValidationError(origin, "expected <section>.<key>");
  root[section][key] = value;
}

}  // namespace

json layered_config(const std::optional<fs::path> & file, const std::map<std::string, std::string> & env,
                    const std::vector<std::string> & overrides)
{
  json cfg = json::object();
  if (file) {
    cfg = io::read_json(*file);
    if (!cfg.is_object()) throw ValidationError(file->string(), "config must be an object");
  }
  const std::string prefix = kEnvPrefix;
  for (const auto & [name, value] : env) {
    if (name.rfind(prefix, 0) != 0) continue;
    const std::string rest = name.substr(prefix.size());
    const auto sep = rest.find("__");
    if (sep == std::string::npos) continue;
    set_path(cfg, lower(rest.substr(0, sep)), lower(rest.substr(sep + 2)), parse_value(value), name);
  }
  for (const auto & o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ValidationError("--set " + o, "expected section.key=value");
    }
    set_path(cfg, o.substr(0, dot), o.substr(dot + 1, eq - dot - 1), parse_value(o.substr(eq + 1)),
             "--set " + o);
  }
  return cfg;
}

std::map<std::string, std::string> process_environment()
{
  std::map<std::string, std::string> env;
  for (char ** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq != std::string::npos) env[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return env;
}

namespace
{

json section(const json & cfg, const char * name)
{
  auto it = cfg.find(name);
  return it == cfg.end() ? json() : *it;
}

struct FrameRange
{
  std::size_t first{0};
  std::size_t last{0};
};

FrameRange parse_frames(const std::string & spec, std::size_t count)
{
  FrameRange r{0, count == 0 ? 0 : count - 1};
  if (spec.empty()) return r;
  const auto dots = spec.find("..");
  try {
    if (dots == std::string::npos) {
      r.first = r.last = std::stoul(spec);
    } else {
      r.first = std::stoul(spec.substr(0, dots));
      r.last = std::stoul(spec.substr(dots + 2));
    }
  } catch (const std::exception &) {
    throw ValidationError("--frames", "expected a..b");
  }
  if (r.first > r.last || r.last >= count) throw ValidationError("--frames", "range outside the scene");
  return r;
}

int cmd_generate(const std::string & scene, const std::optional<fs::path> & config_file,
                 const std::vector<std::string> & sets, const std::map<std::string, std::string> & env,
                 const std::string & out_path, const std::string & frames, int jobs, std::ostream & out)
{
  const auto start = std::chrono::steady_clock::now();
  const json cfg_json = layered_config(config_file, env, sets);
  const auto cfg = pseudolabel::config_from_json(section(cfg_json, "pipeline"));
  const io::SceneBundle bundle = io::load_bundle(scene, jobs);
  pseudolabel::validate_config(cfg, bundle);
  const FrameRange range = parse_frames(frames, bundle.frames.size());

  io::CuboidFile result;
  std::vector<std::vector<Cuboid>> per_frame;
  if (!bundle.frames.empty()) {
    const std::size_t n = range.last - range.first + 1;
    per_frame.resize(n);
    parallel_for(n, jobs, [&](std::size_t k) {
      per_frame[k] = pseudolabel::generate_frame(bundle, range.first + k, cfg);
    });
    for (std::size_t k = 0; k < n; ++k) {
      const auto & frame = bundle.frames[range.first + k];
      result.frame_ids.push_back(frame.frame_id);
      result.cuboids.insert(result.cuboids.end(), per_frame[k].begin(), per_frame[k].end());
      out << frame.frame_id << " " << per_frame[k].size() << "\n";
    }
  }
  result.provenance = json{{"command", "generate"},
                           {"scene_id", bundle.scene_id},
                           {"frames", frames.empty() ? json("all") : json(frames)},
                           {"pipeline", pseudolabel::config_to_json(cfg)}};
  io::write_cuboids(result, out_path);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << "frames " << result.frame_ids.size() << ", cuboids " << result.cuboids.size() << ", wall "
      << std::fixed << std::setprecision(3) << secs << " s\n";
  return kExitOk;
}

int cmd_fuse(const std::string & cm3d_path, const std::string & external_path,
             const std::optional<fs::path> & config_file, const std::vector<std::string> & sets,
             const std::map<std::string, std::string> & env, std::optional<double> tau,
             const std::string & out_path, std::ostream & out)
{
  json cfg_json = layered_config(config_file, env, sets);
  if (tau) cfg_json["fusion"]["tau"] = *tau;
  const auto cfg = fusion::config_from_json(section(cfg_json, "fusion"));
  const io::CuboidFile cm3d = io::read_cuboid_file(cm3d_path);
  const io::CuboidFile external = io::read_cuboid_file(external_path);
  for (std::size_t i = 0; i < external.cuboids.size(); ++i) {
    if (external.cuboids[i].source != CuboidSource::kExternal) {
      throw ValidationError(external_path + ".cuboids[" + std::to_string(i) + "].source",
                            "external detections must have source 'external'");
    }
  }
  io::CuboidFile result;
  result.frame_ids = cm3d.frame_ids;
  result.cuboids = fusion::fuse_frames(cm3d.cuboids, external.cuboids, cfg);
  result.provenance = json{{"command", "fuse"}, {"fusion", fusion::config_to_json(cfg)}};
  io::write_cuboids(result, out_path);
  const auto fused = std::count_if(result.cuboids.begin(), result.cuboids.end(),
                                   [](const Cuboid & c) { return c.source == CuboidSource::kFused; });
  out << "cuboids " << result.cuboids.size() << ", fused " << fused << "\n";
  return kExitOk;
}

int cmd_eval(const std::string & pred_path, const std::string & gt_path,
             const std::optional<fs::path> & config_file, const std::vector<std::string> & sets,
             const std::map<std::string, std::string> & env, bool class_agnostic,
             const std::string & out_path, std::ostream & out)
{
  json cfg_json = layered_config(config_file, env, sets);
  if (class_agnostic) cfg_json["eval"]["class_agnostic"] = true;
  const auto cfg = metrics::config_from_json(section(cfg_json, "eval"));
  const io::CuboidFile preds = io::read_cuboid_file(pred_path);
  const io::CuboidFile gts = io::read_cuboid_file(gt_path);
  const auto report = metrics::evaluate(preds.cuboids, preds.frame_ids, gts.cuboids, gts.frame_ids, cfg);
  io::write_report(report, out_path, json{{"command", "eval"}, {"eval", metrics::config_to_json(cfg)}});
  out << metrics::format_table(report);
  return kExitOk;
}

int cmd_synth(const std::optional<fs::path> & config_file, const std::vector<std::string> & sets,
              const std::map<std::string, std::string> & env, std::optional<std::uint64_t> seed,
              double fp_rate, double fn_rate, const std::string & out_dir, std::ostream & out)
{
  json cfg_json = layered_config(config_file, env, sets);
  json synth_json = section(cfg_json, "synth");
  if (synth_json.is_null()) synth_json = json::object();
  if (seed) synth_json["seed"] = *seed;
  const auto cfg = synth::config_from_json(synth_json);
  synth::SynthOutput result = synth::generate(cfg);
  if (fp_rate > 0.0 || fn_rate > 0.0) {
    auto noisy = synth::make_mask_noise(result.bundle, fp_rate, fn_rate, cfg.seed ^ 0x6d61736bULL);
    result.bundle = std::move(noisy.bundle);
    out << "masks dropped " << noisy.dropped << ", injected " << noisy.injected << "\n";
  }
  synth::write_output(result, out_dir);
  io::write_text(json{{"synth", synth::config_to_json(cfg)}}.dump(2) + "\n", fs::path(out_dir) / "synth_config.json");
  out << "scene " << cfg.scene_id << ", frames " << result.bundle.frames.size() << ", objects "
      << result.ground_truth.cuboids.size() << " -> " << (fs::path(out_dir) / "scene.json").string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err,
        const std::map<std::string, std::string> & env)
{
  CLI::App app{"Lift 2D instance masks to 3D cuboid pseudo-labels and evaluate them."};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> sets;
  const auto add_common = [&](CLI::App * cmd) {
    cmd->add_option("--config", config, "Layered JSON config file");
    cmd->add_option("--set", sets, "Override a config value: section.key=value");
  };

  std::string scene, out_path, frames;
  int jobs = 1;
  auto * gen = app.add_subcommand("generate", "Generate cuboids for a scene bundle");
  gen->add_option("--scene", scene, "Scene manifest (scene.json)")->required();
  gen->add_option("--out", out_path, "Output cuboid file")->required();
  gen->add_option("--frames", frames, "Inclusive frame index range a..b");
  gen->add_option("--jobs", jobs, "Frame-level parallelism")->check(CLI::PositiveNumber);
  add_common(gen);

  std::string cm3d_path, external_path;
  double tau = 0.0;
  auto * fuse = app.add_subcommand("fuse", "Late-fuse CM3D cuboids with external detections");
  fuse->add_option("--cm3d", cm3d_path, "CM3D cuboid file")->required();
  fuse->add_option("--external", external_path, "External detections (raw logits)")->required();
  auto * tau_opt = fuse->add_option("--tau", tau, "Logit temperature");
  fuse->add_option("--out", out_path, "Output cuboid file")->required();
  add_common(fuse);

  std::string pred_path, gt_path;
  bool class_agnostic = false;
  auto * eval = app.add_subcommand("eval", "Evaluate predictions against ground truth");
  eval->add_option("--pred", pred_path, "Prediction cuboid file")->required();
  eval->add_option("--gt", gt_path, "Ground-truth cuboid file")->required();
  eval->add_flag("--class-agnostic", class_agnostic, "Collapse all classes into one");
  eval->add_option("--out", out_path, "Report file")->default_val("report.json");
  add_common(eval);

  std::uint64_t seed = 0;
  double fp_rate = 0.0, fn_rate = 0.0;
  auto * syn = app.add_subcommand("synth", "Write a synthetic scene bundle with ground truth");
  syn->add_option("--out", out_path, "Output directory")->required();
  auto * seed_opt = syn->add_option("--seed", seed, "Random seed");
  syn->add_option("--mask-fp-rate", fp_rate, "Per-frame spurious mask probability")->check(CLI::Range(0.0, 1.0));
  syn->add_option("--mask-fn-rate", fn_rate, "Per-mask drop probability")->check(CLI::Range(0.0, 1.0));
  add_common(syn);

  std::vector<std::string> argv_store = args.empty() ? std::vector<std::string>{"cuboidlift"} : args;
  std::vector<const char *> argv;
  for (const auto & a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const std::optional<fs::path> config_file =
    config.empty() ? std::nullopt : std::optional<fs::path>(config);
  try {
    if (*gen) return cmd_generate(scene, config_file, sets, env, out_path, frames, jobs, out);
    if (*fuse) {
      return cmd_fuse(cm3d_path, external_path, config_file, sets, env,
                      tau_opt->count() ? std::optional<double>(tau) : std::nullopt, out_path, out);
    }
    if (*eval) return cmd_eval(pred_path, gt_path, config_file, sets, env, class_agnostic, out_path, out);
    if (*syn) {
      return cmd_synth(config_file, sets, env,
                       seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt, fp_rate,
                       fn_rate, out_path, out);
    }
  } catch (const IoError & e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError & e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception & e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err)
{
  return run(args, out, err, process_environment());
}

}  // namespace cuboidlift::cli
