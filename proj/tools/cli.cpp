#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "mmrnn/baselines.hpp"
#include "mmrnn/data.hpp"
#include "mmrnn/gradcheck.hpp"
#include "mmrnn/model_io.hpp"
#include "mmrnn/report.hpp"
#include "mmrnn/train.hpp"
#include "mmrnn/upsample.hpp"

namespace mmrnn::cli {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool sets_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

struct TrainFlags {
  TrainConfig cfg;
  std::string mode = "full";
  std::string init = "uniform";

  TrainConfig resolve() const {
    TrainConfig out = cfg;
    out.backward_mode = mode == "paper" ? BackwardMode::PaperFaithful : BackwardMode::Full;
    out.init_scheme = init == "zeros" ? InitScheme::Zeros : InitScheme::UniformFanIn;
    out.validate();
    return out;
  }
};

void add_train_options(CLI::App& sub, TrainFlags& flags) {
  sub.add_option("--epochs", flags.cfg.epochs, "Training epochs")->capture_default_str();
  sub.add_option("--lr", flags.cfg.lr0, "Initial learning rate")->capture_default_str();
  sub.add_option("--momentum", flags.cfg.momentum, "SGD momentum")->capture_default_str();
  sub.add_option("--clip", flags.cfg.clip_threshold, "Global gradient norm threshold")->capture_default_str();
  sub.add_option("--hidden-dim", flags.cfg.hidden_dim, "Hidden units per plane")->capture_default_str();
  sub.add_option("--decay", flags.cfg.lr_decay, "Multiplicative learning-rate decay per epoch")
      ->capture_default_str();
  sub.add_option("--mode", flags.mode, "Backward pass: full or paper")
      ->check(CLI::IsMember({"full", "paper"}))
      ->capture_default_str();
  sub.add_option("--init", flags.init, "Initialization: uniform or zeros")
      ->check(CLI::IsMember({"uniform", "zeros"}))
      ->capture_default_str();
  sub.add_option("--seed", flags.cfg.seed, "Seed for init and shuffling")->capture_default_str();
  sub.add_flag("--freeze-transfer", flags.cfg.freeze_transfer, "Keep transfer matrices at zero");
}

void write_pgm(const std::filesystem::path& path, const LabelMap& map) {
  std::ostringstream header;
  header << "P5\n" << map.width << ' ' << map.height << "\n255\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> bytes(h.begin(), h.end());
  for (int label : map.labels) bytes.push_back(static_cast<std::uint8_t>(label));
  write_file_bytes(path, bytes);
}

int cmd_gen_data(const SceneSpec& spec, std::size_t scenes, std::size_t first_index, const std::string& out_dir,
                 std::ostream& out) {
  const auto dataset = generate_dataset(spec, scenes, first_index);
  write_dataset(out_dir, dataset);
  out << "wrote " << dataset.size() << " scenes to " << out_dir << '\n';
  return kExitOk;
}

int cmd_train(const TrainConfig& cfg, const std::string& data_dir, const std::string& model_path,
              std::ostream& out) {
  const auto dataset = read_dataset(data_dir);
  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochRecord& r) { out << to_json_line(r) << '\n'; };
  const auto result = train_epochs(cfg, dataset, hooks);
  save_model(model_path, result.model);
  return kExitOk;
}

int cmd_eval(const std::string& data_dir, const std::string& model_path, std::ostream& out) {
  const auto dataset = read_dataset(data_dir);
  const TrainedBaseline trained(BaselineKind::MultimodalOurs, load_model(model_path));
  out << metrics_json(summarize(evaluate(trained, dataset))) << '\n';
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& grid_path, int scale, const std::string& out_path,
                std::ostream& out) {
  const MultimodalModel model = load_model(model_path);
  const GridPair pair = read_grid_pair(grid_path);
  const ProbMap probs = fused_probabilities(forward_coupled(model, pair.color, pair.depth));
  const LabelMap labels = argmax_map(bilinear_upsample(probs, probs.height * scale, probs.width * scale));
  write_pgm(out_path, labels);

  nlohmann::ordered_json meta;
  meta["width"] = labels.width;
  meta["height"] = labels.height;
  meta["num_classes"] = probs.channels;
  meta["scale"] = scale;
  std::filesystem::path sidecar(out_path);
  sidecar.replace_extension(".json");
  const std::string text = meta.dump() + "\n";
  write_file_bytes(sidecar, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  out << "wrote " << labels.width << "x" << labels.height << " label map to " << out_path << '\n';
  return kExitOk;
}

int cmd_gradcheck(GradcheckCase gc, const std::string& mode, double tol, std::ostream& out) {
  const auto result = check_coupled(random_instance(gc), mode == "paper" ? BackwardMode::PaperFaithful
                                                                         : BackwardMode::Full);
  out << std::scientific;
  out.precision(3);
  for (const auto& block : result.report.blocks) out << block.name << ' ' << block.error << '\n';
  const bool ok = result.report.worst.error <= tol;
  out << "worst " << result.report.worst.name << ' ' << result.report.worst.error << (ok ? " PASS" : " FAIL")
      << '\n';
  out << std::defaultfloat;
  return ok ? kExitOk : kExitRuntime;
}

int cmd_ablate(const TrainConfig& cfg, const std::string& data_dir, const std::string& eval_dir,
               const std::string& out_path, std::ostream& out) {
  const auto train_set = read_dataset(data_dir);
  const auto eval_set = eval_dir.empty() ? train_set : read_dataset(eval_dir);
  const std::string report = ablation_json(ablation_report(train_set, eval_set, cfg)) + "\n";
  write_file_bytes(out_path, std::span(reinterpret_cast<const std::uint8_t*>(report.data()), report.size()));
  out << report;
  return kExitOk;
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config") {
      if (k + 1 >= args.size()) throw std::invalid_argument("--config requires a file argument");
      config_path = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      config_path = args[k].substr(9);
    } else {
      rest.push_back(args[k]);
    }
  }
  if (config_path.empty()) return rest;

  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot read config file " + config_path);
  std::vector<std::string> extra;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string key = eq == std::string::npos ? std::string{} : trim(body.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument(config_path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string flag = "--" + key;
    if (!sets_flag(rest, flag)) extra.push_back(flag + "=" + trim(body.substr(eq + 1)));
  }
  rest.insert(rest.end(), extra.begin(), extra.end());
  return rest;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multimodal quad-directional 2D RNN scene labeling", "mmrnn"};
  app.require_subcommand(1);
  app.add_option("--config", "key = value file; command-line flags take precedence");

  SceneSpec spec;
  std::size_t scenes = 40;
  std::size_t first_index = 0;
  std::string out_dir;
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic two-modality dataset");
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_option("--scenes", scenes, "Number of scenes")->capture_default_str();
  gen->add_option("--first-index", first_index, "Index of the first scene")->capture_default_str();
  gen->add_option("--height", spec.height, "Grid rows")->capture_default_str();
  gen->add_option("--width", spec.width, "Grid columns")->capture_default_str();
  gen->add_option("--classes", spec.num_classes, "Number of classes")->capture_default_str();
  gen->add_option("--ambiguity", spec.ambiguity, "Fraction of colliding class pairs")->capture_default_str();
  gen->add_option("--noise", spec.noise_sigma, "Feature noise sigma")->capture_default_str();
  gen->add_option("--unlabeled-frac", spec.unlabeled_frac, "Fraction of unlabeled cells")->capture_default_str();
  gen->add_option("--seed", spec.seed, "Dataset seed")->capture_default_str();
  gen->add_option("--color-dim", spec.color_dim, "Color feature dimension")->capture_default_str();
  gen->add_option("--depth-dim", spec.depth_dim, "Depth feature dimension")->capture_default_str();
  gen->add_option("--feature-scale", spec.feature_scale, "Standard deviation of class prototype entries")
      ->capture_default_str();

  TrainFlags train_flags;
  std::string data_dir;
  std::string model_path;
  auto* train = app.add_subcommand("train", "Train the coupled model; prints JSON-lines history");
  train->add_option("--data", data_dir, "Dataset directory")->required();
  train->add_option("--out", model_path, "Model file to write")->required();
  add_train_options(*train, train_flags);

  auto* eval = app.add_subcommand("eval", "Evaluate a model; prints metrics JSON");
  eval->add_option("--data", data_dir, "Dataset directory")->required();
  eval->add_option("--model", model_path, "Model file")->required();

  std::string grid_path;
  std::string out_path;
  int scale = 1;
  auto* predict = app.add_subcommand("predict", "Write an upsampled label map as PGM");
  predict->add_option("--model", model_path, "Model file")->required();
  predict->add_option("--grid", grid_path, "Grid-pair file")->required();
  predict->add_option("--scale", scale, "Upsampling factor")->check(CLI::PositiveNumber)->capture_default_str();
  predict->add_option("--out", out_path, "Output PGM path")->required();

  GradcheckCase gc;
  std::string gc_mode = "full";
  double tol = 1e-4;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  gradcheck->add_option("--seed", gc.seed, "Instance seed")->capture_default_str();
  gradcheck->add_option("--tol", tol, "Largest accepted relative error")->capture_default_str();
  gradcheck->add_option("--height", gc.height, "Grid rows")->capture_default_str();
  gradcheck->add_option("--width", gc.width, "Grid columns")->capture_default_str();
  gradcheck->add_option("--mode", gc_mode, "Backward pass: full or paper")
      ->check(CLI::IsMember({"full", "paper"}))
      ->capture_default_str();

  TrainFlags ablate_flags;
  std::string eval_dir;
  auto* ablate = app.add_subcommand("ablate", "Train and score every fusion variant; writes a JSON report");
  ablate->add_option("--data", data_dir, "Training dataset directory")->required();
  ablate->add_option("--eval-data", eval_dir, "Evaluation dataset directory (default: --data)");
  ablate->add_option("--out", out_path, "Report path")->required();
  add_train_options(*ablate, ablate_flags);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }

  try {
    if (*gen) return cmd_gen_data(spec, scenes, first_index, out_dir, out);
    if (*train) return cmd_train(train_flags.resolve(), data_dir, model_path, out);
    if (*eval) return cmd_eval(data_dir, model_path, out);
    if (*predict) return cmd_predict(model_path, grid_path, scale, out_path, out);
    if (*gradcheck) return cmd_gradcheck(gc, gc_mode, tol, out);
    if (*ablate) return cmd_ablate(ablate_flags.resolve(), data_dir, eval_dir, out_path, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace mmrnn::cli
