// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>

#include "fieldsplat/convert.hpp"
#include "fieldsplat/json_util.hpp"
#include "fieldsplat/rng.hpp"
#include "fieldsplat/splat_train.hpp"

namespace fieldsplat {

// One document that drives every pipeline stage. Sub-seeds default to values
// derived from the top-level seed so one --seed reproduces a whole run.
struct RunConfig {
  uint64_t seed = 1;
  std::string scene_path = "three-spheres";  // builtin name or scene JSON path
  std::string out_dir = "out";
  std::array<int, 3> field_dims = {64, 64, 64};
  TrainConfig train;
  N2GConfig n2g;
  G2NConfig g2n;
  FinetuneConfig finetune;
  std::array<int, 3> finetune_snapshots = {0, 100, 1000};
  size_t baseline_splats = 20000;
  FinetuneConfig baseline_finetune;

  // Stage tags keep the derived sub-seeds distinct.
  enum Stage : uint64_t {
    kStageTrain = 1,
    kStageN2G = 2,
    kStageG2N = 3,
    kStageFinetune = 4,
    kStageBaseline = 5
  };

  void derive_seeds() {
    train.seed = hash_combine(seed, kStageTrain);
    n2g.seed = hash_combine(seed, kStageN2G);
    g2n.train.seed = hash_combine(seed, kStageG2N);
    finetune.seed = hash_combine(seed, kStageFinetune);
    baseline_finetune.seed = hash_combine(seed, kStageBaseline);
  }
};

namespace detail {

inline void train_config_from_json(const Json& j, TrainConfig& cfg, const std::string& where) {
  reject_unknown_keys(j,
                      {"iterations", "rays_per_batch", "learning_rate_density",
                       "learning_rate_sh", "learning_rate_background", "samples_per_ray",
                       "seed", "stratified"},
                      where);
  if (j.contains("iterations")) cfg.iterations = j["iterations"].get<int>();
  if (j.contains("rays_per_batch")) cfg.rays_per_batch = j["rays_per_batch"].get<int>();
  if (j.contains("learning_rate_density")) {
    cfg.learning_rate_density = j["learning_rate_density"].get<double>();
  }
  if (j.contains("learning_rate_sh")) cfg.learning_rate_sh = j["learning_rate_sh"].get<double>();
  if (j.contains("learning_rate_background")) {
    cfg.learning_rate_background = j["learning_rate_background"].get<double>();
  }
  if (j.contains("samples_per_ray")) cfg.samples_per_ray = j["samples_per_ray"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  if (j.contains("stratified")) cfg.stratified = j["stratified"].get<bool>();
  cfg.validate();
}

inline void finetune_config_from_json(const Json& j, FinetuneConfig& cfg,
                                      const std::string& where) {
  reject_unknown_keys(j,
                      {"iterations", "learning_rate_position", "learning_rate_scale",
                       "learning_rate_rotation", "learning_rate_opacity", "learning_rate_sh",
                       "loss_lambda", "seed"},
                      where);
  if (j.contains("iterations")) cfg.iterations = j["iterations"].get<int>();
  if (j.contains("learning_rate_position")) {
    cfg.learning_rate_position = j["learning_rate_position"].get<double>();
  }
  if (j.contains("learning_rate_scale")) {
    cfg.learning_rate_scale = j["learning_rate_scale"].get<double>();
  }
  if (j.contains("learning_rate_rotation")) {
    cfg.learning_rate_rotation = j["learning_rate_rotation"].get<double>();
  }
  if (j.contains("learning_rate_opacity")) {
    cfg.learning_rate_opacity = j["learning_rate_opacity"].get<double>();
  }
  if (j.contains("learning_rate_sh")) cfg.learning_rate_sh = j["learning_rate_sh"].get<double>();
  if (j.contains("loss_lambda")) cfg.loss_lambda = j["loss_lambda"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  cfg.validate();
}

inline void n2g_config_from_json(const Json& j, N2GConfig& cfg, const std::string& where) {
  reject_unknown_keys(j, {"n_rays", "opacity_threshold", "max_depth", "knn_k", "seed"}, where);
  if (j.contains("n_rays")) cfg.n_rays = j["n_rays"].get<size_t>();
  if (j.contains("opacity_threshold")) cfg.opacity_threshold = j["opacity_threshold"].get<double>();
  if (j.contains("max_depth")) cfg.max_depth = j["max_depth"].get<double>();
  if (j.contains("knn_k")) cfg.knn_k = j["knn_k"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  cfg.validate();
}

inline std::array<int, 3> dims_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(errc::kSchemaError, where + ": expected [nx, ny, nz]");
  }
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

inline void g2n_config_from_json(const Json& j, G2NConfig& cfg, const std::string& where) {
  reject_unknown_keys(
      j, {"field_dims", "train", "reuse_field", "bbox_min", "bbox_max", "init_raw_density"},
      where);
  if (j.contains("field_dims")) {
    const auto d = dims_from_json(j["field_dims"], where + ".field_dims");
    cfg.nx = d[0];
    cfg.ny = d[1];
    cfg.nz = d[2];
  }
  if (j.contains("train")) train_config_from_json(j["train"], cfg.train, where + ".train");
  if (j.contains("reuse_field")) cfg.reuse_field = j["reuse_field"].get<bool>();
  if (j.contains("bbox_min")) cfg.bbox_min = vec3_from_json(j["bbox_min"], where + ".bbox_min");
  if (j.contains("bbox_max")) cfg.bbox_max = vec3_from_json(j["bbox_max"], where + ".bbox_max");
  if (j.contains("init_raw_density")) cfg.init_raw_density = j["init_raw_density"].get<double>();
  cfg.validate();
}

}  // namespace detail

inline RunConfig run_config_from_json(const Json& j) {
  reject_unknown_keys(j,
                      {"seed", "scene", "out_dir", "field_dims", "train", "n2g", "g2n",
                       "finetune", "finetune_snapshots", "baseline"},
                      "config");
  RunConfig cfg;
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  cfg.derive_seeds();
  if (j.contains("scene")) cfg.scene_path = j["scene"].get<std::string>();
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("field_dims")) {
    cfg.field_dims = detail::dims_from_json(j["field_dims"], "config.field_dims");
  }
  if (j.contains("train")) detail::train_config_from_json(j["train"], cfg.train, "config.train");
  if (j.contains("n2g")) detail::n2g_config_from_json(j["n2g"], cfg.n2g, "config.n2g");
  if (j.contains("g2n")) detail::g2n_config_from_json(j["g2n"], cfg.g2n, "config.g2n");
  if (j.contains("finetune")) {
    detail::finetune_config_from_json(j["finetune"], cfg.finetune, "config.finetune");
  }
  if (j.contains("finetune_snapshots")) {
    cfg.finetune_snapshots =
        detail::dims_from_json(j["finetune_snapshots"], "config.finetune_snapshots");
  }
  if (j.contains("baseline")) {
    const Json& b = j["baseline"];
    reject_unknown_keys(b, {"splat_count", "finetune"}, "config.baseline");
    if (b.contains("splat_count")) cfg.baseline_splats = b["splat_count"].get<size_t>();
    if (b.contains("finetune")) {
      detail::finetune_config_from_json(b["finetune"], cfg.baseline_finetune,
                                        "config.baseline.finetune");
    }
  }
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(load_json(path));
}

}  // namespace fieldsplat
