#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cspin/config.hpp"
#include "cspin/io.hpp"

namespace cspin {

struct FigureOptions {
  std::string scale = "default";  // "quick" shrinks grids and horizons for smoke runs
  int threads = 0;
  bool dense = false;
  Tolerances tolerances;
  HusimiGridSpec husimi;
};

struct FigureInfo {
  std::string id;
  std::string description;
};

const std::vector<FigureInfo>& figure_catalog();
bool is_figure_id(const std::string& id);

/// Writes the data files of one figure plus manifest.json into out_root/id
/// and returns the manifest document.
io::json reproduce_figure(const std::string& id, const std::filesystem::path& out_root,
                          const FigureOptions& options = {});

}  // namespace cspin
