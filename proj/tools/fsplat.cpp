// Copyright Contributors to the FieldSplat Project
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include "fieldsplat/fieldsplat.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fieldsplat pipeline"};
  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);
  return 0;
}
