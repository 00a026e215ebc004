// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fieldsplat/adam.hpp"
#include "fieldsplat/analytic_scene.hpp"
#include "fieldsplat/benchmark.hpp"
#include "fieldsplat/camera.hpp"
#include "fieldsplat/camera_io.hpp"
#include "fieldsplat/convert.hpp"
#include "fieldsplat/error.hpp"
#include "fieldsplat/field_train.hpp"
#include "fieldsplat/geometry.hpp"
#include "fieldsplat/image.hpp"
#include "fieldsplat/image_io.hpp"
#include "fieldsplat/knn.hpp"
#include "fieldsplat/metrics.hpp"
#include "fieldsplat/parallel.hpp"
#include "fieldsplat/rasterize.hpp"
#include "fieldsplat/rasterize_backward.hpp"
#include "fieldsplat/rng.hpp"
#include "fieldsplat/run_config.hpp"
#include "fieldsplat/sh.hpp"
#include "fieldsplat/splat.hpp"
#include "fieldsplat/splat_edit.hpp"
#include "fieldsplat/splat_train.hpp"
#include "fieldsplat/trajectory.hpp"
#include "fieldsplat/voxel_field.hpp"
#include "fieldsplat/volume_render.hpp"
