#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "palmseg/augment.hpp"
#include "palmseg/baseline.hpp"
#include "palmseg/dataset.hpp"
#include "palmseg/errors.hpp"
#include "palmseg/gradcheck.hpp"
#include "palmseg/metrics.hpp"
#include "palmseg/png_io.hpp"
#include "palmseg/train.hpp"
#include "palmseg/transforms.hpp"
#include "palmseg/unet.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace palmseg;
using cli::RunConfig;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

/// Creates --out and drops the resolved configuration next to the outputs.
void open_out_dir(const RunConfig& rc) {
  fs::create_directories(rc.out_dir);
  write_text(fs::path(rc.out_dir) / "config_resolved.txt", rc.resolved_text());
}

std::vector<ImageSample> load_with_splits(const std::string& data_root,
                                          bool require_manifest) {
  std::vector<ImageSample> samples = load_dataset(data_root);
  fs::path manifest = fs::path(data_root) / "splits.tsv";
  if (fs::exists(manifest)) {
    apply_split_manifest(samples, manifest);
  } else if (require_manifest) {
    throw DataError("no splits.tsv under '" + data_root +
                    "'; run prepare first");
  }
  return samples;
}

std::vector<ImageSample> copy_split(const std::vector<ImageSample>& samples,
                                    std::string_view split) {
  std::vector<ImageSample> out;
  for (const ImageSample* s : samples_in_split(samples, split)) {
    out.push_back(*s);
  }
  return out;
}

void write_pairs(const fs::path& out_dir,
                 const std::vector<ImageSample>& samples) {
  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "masks");
  for (const ImageSample& s : samples) {
    write_png(out_dir / "images" / (s.id + ".png"), s.image);
    write_png(out_dir / "masks" / (s.id + ".png"), s.mask);
  }
}

int run_prepare(RunConfig& rc) {
  if (rc.prepare_size < 1) throw ConfigError("prepare: size must be >= 1");
  LoadReport report;
  std::vector<ImageSample> samples = load_dataset(rc.data_root, &report);
  for (ImageSample& s : samples) s = resize_to(s, rc.prepare_size);
  split_samples(samples, rc.train_ratio, rc.val_ratio, rc.test_ratio, rc.seed);

  open_out_dir(rc);
  fs::path out(rc.out_dir);
  write_pairs(out, samples);
  write_split_manifest(samples, out / "splits.tsv");

  std::string rep = "loaded = " + std::to_string(report.n_loaded) +
                    "\nrejected = " + std::to_string(report.n_rejected) + "\n";
  for (const std::string& issue : report.issues) rep += issue + "\n";
  write_text(out / "load_report.txt", rep);

  size_t n_train = samples_in_split(samples, "train").size();
  size_t n_val = samples_in_split(samples, "val").size();
  size_t n_test = samples_in_split(samples, "test").size();
  std::printf("prepared %zu samples (%zu rejected) at %dx%d\n",
              samples.size(), report.n_rejected, rc.prepare_size,
              rc.prepare_size);
  std::printf("split train/val/test = %zu/%zu/%zu\n", n_train, n_val, n_test);
  return 0;
}

int run_augment(RunConfig& rc) {
  std::vector<ImageSample> sources = load_with_splits(rc.data_root, false);
  std::vector<ImageSample> expanded = augment_dataset(sources, rc.augment);

  open_out_dir(rc);
  fs::path out(rc.out_dir);
  write_pairs(out, expanded);
  bool any_split = std::any_of(expanded.begin(), expanded.end(),
                               [](const ImageSample& s) {
                                 return !s.split.empty();
                               });
  if (any_split) write_split_manifest(expanded, out / "splits.tsv");
  write_text(out / "lineage.tsv", lineage_manifest(expanded));

  std::printf("augmented %zu sources into %zu samples (multiplier %d)\n",
              sources.size(), expanded.size(), rc.augment.multiplier);
  return 0;
}

int run_train(RunConfig& rc) {
  std::vector<ImageSample> samples = load_with_splits(rc.data_root, true);
  std::vector<ImageSample> train_set = copy_split(samples, "train");
  std::vector<ImageSample> val_set = copy_split(samples, "val");
  if (train_set.empty()) throw DataError("train: the 'train' split is empty");
  if (val_set.empty()) throw DataError("train: the 'val' split is empty");

  Model model = build_unet<float>(rc.unet, rc.seed);
  std::printf("training %s (%lld parameters) on %zu samples, validating on %zu\n",
              rc.unet.use_cfm ? "unet-cf" : "unet",
              static_cast<long long>(param_count(model)), train_set.size(),
              val_set.size());

  open_out_dir(rc);
  fs::path out(rc.out_dir);
  TrainResult result = train(std::move(model), train_set, val_set, rc.train);
  write_text(out / "train_log.tsv", format_log(result.log));
  save_model(result.model, out / "model.ckpt");

  std::printf("epochs = %zu\n", result.log.size());
  std::printf("best_epoch = %d\n", result.best_epoch);
  std::printf("best_val_loss = %.6f\n", result.best_val_loss);
  if (result.stopped_early) std::printf("stopped_early = true\n");
  if (!result.abort_reason.empty()) {
    std::fprintf(stderr, "training aborted: %s\n",
                 result.abort_reason.c_str());
    return 3;
  }
  return 0;
}

int run_eval(RunConfig& rc, const std::string& model_path,
             const std::string& pred_dir, bool with_baseline, bool save_pred) {
  if (model_path.empty() == pred_dir.empty()) {
    throw ArgumentError("eval: exactly one of --model or --pred is required");
  }
  std::vector<ImageSample> samples = load_with_splits(rc.data_root, false);
  std::vector<const ImageSample*> chosen;
  if (rc.eval_split == "all") {
    for (const ImageSample& s : samples) chosen.push_back(&s);
  } else {
    chosen = samples_in_split(samples, rc.eval_split);
  }
  if (chosen.empty()) {
    throw DataError("eval: split '" + rc.eval_split + "' has no samples");
  }

  open_out_dir(rc);
  fs::path out(rc.out_dir);

  MetricsAccumulator acc;
  std::string method;
  int64_t params = 0;
  if (!model_path.empty()) {
    Model model = load_model(model_path);
    method = model.config.use_cfm ? "unet-cf" : "unet";
    params = param_count(model);
    if (save_pred) fs::create_directories(out / "pred");
    for (const ImageSample* s : chosen) {
      Prediction p =
          predict(model, s->image, rc.threshold, rc.post_blur, rc.blur_sigma);
      acc.add_masks(p.mask, s->mask);
      if (save_pred) write_png(out / "pred" / (s->id + ".png"), p.mask);
    }
  } else {
    method = "pred";
    for (const ImageSample* s : chosen) {
      fs::path path = fs::path(pred_dir) / (s->id + ".png");
      if (!fs::exists(path)) {
        throw DataError("eval: missing prediction '" + path.string() + "'");
      }
      GrayImage pred = read_png(path).to_gray();
      if (!pred.same_size(s->image)) {
        throw DataError("eval: prediction '" + path.string() +
                        "' does not match the sample size");
      }
      for (uint8_t& v : pred.pixels) v = v >= 128 ? 255 : 0;
      acc.add_masks(pred, s->mask);
    }
  }

  MetricsReport report = acc.finalize(rc.threshold);
  std::string text = metrics_text(report);
  std::fputs(text.c_str(), stdout);
  write_text(out / "metrics.txt", text);

  if (with_baseline) {
    MetricsAccumulator bacc;
    for (const ImageSample* s : chosen) {
      bacc.add_masks(baseline_pipeline(s->image, rc.baseline), s->mask);
    }
    MetricsReport brep = bacc.finalize(rc.threshold);
    std::string table = metrics_table(
        {{method, params, report.f1, report.miou},
         {"baseline", 0, brep.f1, brep.miou}});
    std::fputs(table.c_str(), stdout);
    write_text(out / "comparison.tsv", table);
  }
  return 0;
}

int run_predict(RunConfig& rc, const std::string& model_path,
                const std::string& image_path, int size) {
  Model model = load_model(model_path);
  GrayImage gray = read_png(image_path).to_gray();
  if (size > 0) gray = resize(gray, size, size, Interp::Bilinear);
  Prediction p = predict(model, gray, rc.threshold, rc.post_blur,
                         rc.blur_sigma);

  open_out_dir(rc);
  fs::path out(rc.out_dir);
  std::string stem = fs::path(image_path).stem().string();
  write_png(out / (stem + "_mask.png"), p.mask);
  write_png(out / (stem + "_overlay.png"), overlay_mask(gray, p.mask));

  size_t positives = 0;
  for (uint8_t v : p.mask.pixels) positives += v != 0;
  std::printf("wrote %s_mask.png and %s_overlay.png (%zu/%zu line pixels)\n",
              stem.c_str(), stem.c_str(), positives, p.mask.pixels.size());
  return 0;
}

int run_baseline(RunConfig& rc) {
  open_out_dir(rc);
  fs::path out(rc.out_dir);
  fs::create_directories(out / "masks");
  fs::path root(rc.data_root);

  if (fs::is_directory(root / "images")) {
    std::vector<ImageSample> samples = load_with_splits(rc.data_root, false);
    MetricsAccumulator acc;
    for (const ImageSample& s : samples) {
      GrayImage mask = baseline_pipeline(s.image, rc.baseline);
      write_png(out / "masks" / (s.id + ".png"), mask);
      acc.add_masks(mask, s.mask);
    }
    MetricsReport report = acc.finalize(rc.threshold);
    std::string text = metrics_text(report);
    std::fputs(text.c_str(), stdout);
    write_text(out / "metrics.txt", text);
    std::printf("wrote %zu masks\n", samples.size());
    return 0;
  }

  std::vector<fs::path> files;
  if (!fs::is_directory(root)) {
    throw DataError("baseline: '" + rc.data_root + "' is not a directory");
  }
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw DataError("baseline: no .png files under '" + rc.data_root + "'");
  }
  for (const fs::path& file : files) {
    GrayImage mask = baseline_pipeline(read_png(file).to_gray(), rc.baseline);
    write_png(out / "masks" / file.filename(), mask);
  }
  std::printf("wrote %zu masks\n", files.size());
  return 0;
}

int run_gradcheck(RunConfig& rc) {
  std::vector<GradCheckItem> items = gradcheck_suite(rc.seed);
  double worst = 0.0;
  bool ok = true;
  for (const GradCheckItem& item : items) {
    std::printf("%-24s %11.3e  %s\n", item.name.c_str(), item.max_rel_error,
                item.passed() ? "ok" : "FAIL");
    worst = std::max(worst, item.max_rel_error);
    ok = ok && item.passed();
  }
  std::printf("max relative error = %.3e\n", worst);
  if (!ok) {
    std::fprintf(stderr, "gradient check failed\n");
    return 3;
  }
  return 0;
}

int run_params(RunConfig& rc) {
  rc.unet.validate();
  int64_t count = 0;
  for (const auto& [name, shape] : parameter_layout(rc.unet)) {
    count += shape_numel(shape);
  }
  std::printf("%lld\n", static_cast<long long>(count));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig rc;
  try {
    for (int i = 1; i < argc; ++i) {
      std::string arg = argv[i];
      if (arg == "--config" && i + 1 < argc) {
        rc.load_file(argv[i + 1]);
        break;
      }
      if (arg.rfind("--config=", 0) == 0) {
        rc.load_file(arg.substr(9));
        break;
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }

  CLI::App app{"Palm-line segmentation pipeline"};
  app.require_subcommand(1);

  std::string model_path;
  std::string pred_dir;
  std::string image_path;
  bool with_baseline = false;
  bool save_pred = false;
  int predict_size = 0;

  auto add_shared = [&](CLI::App* cmd, bool need_data, bool need_out) {
    cmd->add_option("--config", rc.config_path, "key = value settings file");
    auto* data = cmd->add_option("--data", rc.data_root, "dataset root");
    auto* out = cmd->add_option("--out", rc.out_dir,
                                "output directory; all writes land here");
    cmd->add_option("--seed", rc.seed, "root RNG seed");
    cmd->add_option("--device", rc.device, "compute device (only cpu)");
    if (need_data && rc.data_root.empty()) data->required();
    if (need_out && rc.out_dir.empty()) out->required();
  };
  auto add_unet = [&](CLI::App* cmd) {
    cmd->add_option("--depth", rc.unet.depth, "encoder levels");
    cmd->add_option("--base-channels", rc.unet.base_channels,
                    "channels at the first level");
    cmd->add_option("--cfm-reduction", rc.unet.cfm_reduction,
                    "bottleneck channel reduction in the context block");
    cmd->add_flag("--cfm,!--no-cfm", rc.unet.use_cfm,
                  "context fusion bottleneck on/off");
  };
  auto add_predict_opts = [&](CLI::App* cmd) {
    cmd->add_option("--threshold", rc.threshold, "mask binarization threshold");
    cmd->add_flag("--post-blur,!--no-post-blur", rc.post_blur,
                  "smooth the probability map before thresholding");
    cmd->add_option("--blur-sigma", rc.blur_sigma, "post-blur Gaussian sigma");
  };
  auto add_baseline_opts = [&](CLI::App* cmd) {
    cmd->add_option("--clahe-clip", rc.baseline.clahe_clip,
                    "histogram clip limit, multiples of the uniform bin");
    cmd->add_option("--clahe-tiles", rc.baseline.clahe_tiles,
                    "equalization grid tiles per side");
    cmd->add_option("--baseline-blur-sigma", rc.baseline.blur_sigma,
                    "smoothing sigma before edge detection");
    cmd->add_option("--canny-sigma", rc.baseline.canny_sigma,
                    "gradient smoothing sigma in the edge detector");
    cmd->add_option("--canny-low", rc.baseline.canny_low,
                    "hysteresis low threshold");
    cmd->add_option("--canny-high", rc.baseline.canny_high,
                    "hysteresis high threshold");
    cmd->add_option("--dilate-radius", rc.baseline.dilate_radius,
                    "edge thickening radius, pixels");
  };

  CLI::App* prepare = app.add_subcommand(
      "prepare", "Load, resize and split a raw image/mask directory");
  add_shared(prepare, true, true);
  prepare->add_option("--size", rc.prepare_size, "square resize extent");
  prepare->add_option("--train-ratio", rc.train_ratio,
                      "split fraction routed to train");
  prepare->add_option("--val-ratio", rc.val_ratio,
                      "split fraction routed to validation");
  prepare->add_option("--test-ratio", rc.test_ratio,
                      "split fraction routed to test");

  CLI::App* augment = app.add_subcommand(
      "augment", "Expand a prepared dataset with random transforms");
  add_shared(augment, true, true);
  augment->add_option("--multiplier", rc.augment.multiplier,
                      "copies per source, original included");
  augment->add_option("--hflip-p", rc.augment.hflip_p,
                      "horizontal mirror probability");
  augment->add_flag("--hflip,!--no-hflip", rc.augment.enable_hflip,
                    "horizontal mirror on/off");
  augment->add_option("--ssr-p", rc.augment.ssr_p,
                      "shift-scale-rotate probability");
  augment->add_flag("--ssr,!--no-ssr", rc.augment.enable_ssr,
                    "shift-scale-rotate on/off");
  augment->add_option("--max-shift", rc.augment.ssr.max_shift,
                      "translation bound, fraction of the extent");
  augment->add_option("--scale-lo", rc.augment.ssr.scale_lo,
                      "lower zoom bound");
  augment->add_option("--scale-hi", rc.augment.ssr.scale_hi,
                      "upper zoom bound");
  augment->add_option("--max-angle", rc.augment.ssr.max_angle,
                      "rotation bound, degrees");
  augment->add_flag("--brightness-contrast,!--no-brightness-contrast",
                    rc.augment.enable_brightness_contrast,
                    "brightness/contrast jitter on/off");
  augment->add_option("--brightness-contrast-p",
                      rc.augment.brightness_contrast_p,
                      "brightness/contrast jitter probability");
  augment->add_option("--max-brightness", rc.augment.max_brightness,
                      "additive brightness bound, fraction of full range");
  augment->add_option("--max-contrast", rc.augment.max_contrast,
                      "contrast gain bound around 1");
  augment->add_flag("--clahe,!--no-clahe", rc.augment.enable_clahe,
                    "adaptive equalization on/off");
  augment->add_option("--clahe-p", rc.augment.clahe_p,
                      "adaptive equalization probability");
  augment->add_option("--clahe-clip", rc.augment.clahe_clip,
                      "histogram clip limit, multiples of the uniform bin");
  augment->add_option("--clahe-tiles", rc.augment.clahe_tiles,
                      "equalization grid tiles per side");

  CLI::App* train_cmd = app.add_subcommand(
      "train", "Train the segmentation network on a prepared dataset");
  add_shared(train_cmd, true, true);
  add_unet(train_cmd);
  train_cmd->add_option("--lr", rc.train.lr, "initial learning rate");
  train_cmd->add_option("--batch-size", rc.train.batch_size,
                        "samples per optimizer step");
  train_cmd->add_option("--max-epochs", rc.train.max_epochs, "epoch cap");
  train_cmd->add_option("--plateau-patience", rc.train.plateau_patience,
                        "stalled epochs before the lr drops");
  train_cmd->add_option("--plateau-factor", rc.train.plateau_factor,
                        "lr multiplier on plateau");
  train_cmd->add_option("--early-stop-patience", rc.train.early_stop_patience,
                        "stalled epochs before training stops");
  train_cmd->add_option("--loss", rc.train.loss, "bce or mse");

  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Score a model or a directory of predicted masks");
  add_shared(eval_cmd, true, true);
  eval_cmd->add_option("--model", model_path, "trained checkpoint");
  eval_cmd->add_option("--pred", pred_dir, "directory of predicted masks");
  eval_cmd->add_option("--split", rc.eval_split,
                       "train, val, test or all");
  eval_cmd->add_flag("--baseline", with_baseline,
                     "also score the classical pipeline side by side");
  eval_cmd->add_flag("--save-pred", save_pred,
                     "write predicted masks under --out/pred");
  add_predict_opts(eval_cmd);
  add_baseline_opts(eval_cmd);

  CLI::App* predict_cmd = app.add_subcommand(
      "predict", "Segment one image and write mask plus overlay");
  add_shared(predict_cmd, false, true);
  predict_cmd->add_option("--model", model_path, "trained checkpoint")
      ->required();
  predict_cmd->add_option("--image", image_path, "input PNG")->required();
  predict_cmd->add_option("--size", predict_size,
                          "resize the input to this square extent first");
  add_predict_opts(predict_cmd);

  CLI::App* baseline_cmd = app.add_subcommand(
      "baseline", "Run the classical edge pipeline over a directory");
  add_shared(baseline_cmd, true, true);
  add_baseline_opts(baseline_cmd);

  CLI::App* gradcheck_cmd = app.add_subcommand(
      "gradcheck", "Compare every gradient against finite differences");
  gradcheck_cmd->add_option("--seed", rc.seed, "root RNG seed");

  CLI::App* params_cmd = app.add_subcommand(
      "params", "Print the parameter count for a configuration");
  add_unet(params_cmd);
  params_cmd->add_option("--in-channels", rc.unet.in_channels,
                         "input image channels");
  params_cmd->add_option("--out-channels", rc.unet.out_channels,
                         "output map channels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    rc.finalize();
    if (app.got_subcommand(prepare)) return run_prepare(rc);
    if (app.got_subcommand(augment)) return run_augment(rc);
    if (app.got_subcommand(train_cmd)) return run_train(rc);
    if (app.got_subcommand(eval_cmd)) {
      return run_eval(rc, model_path, pred_dir, with_baseline, save_pred);
    }
    if (app.got_subcommand(predict_cmd)) {
      return run_predict(rc, model_path, image_path, predict_size);
    }
    if (app.got_subcommand(baseline_cmd)) return run_baseline(rc);
    if (app.got_subcommand(gradcheck_cmd)) return run_gradcheck(rc);
    if (app.got_subcommand(params_cmd)) return run_params(rc);
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
