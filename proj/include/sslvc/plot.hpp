// sslvc/plot.hpp

// Copyright 2026  sslvc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SSLVC_PLOT_HPP
#define SSLVC_PLOT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "sslvc/types.hpp"

namespace sslvc {

struct ScatterPanel {
  std::string title;  // upper-case letters, digits and a little punctuation
  MatrixD points;     // [n x 2]
  std::vector<int> labels;
};

// Side-by-side scatter panels, one colour per label, written as an RGB
// PNG. Each panel is scaled to its own bounding box. The legend uses
// label_names[label] when present, "S<label>" otherwise.
void write_scatter_png(const std::filesystem::path &path, const std::vector<ScatterPanel> &panels,
                       const std::vector<std::string> &label_names = {}, int panel_size = 420);

}  // namespace sslvc

#endif  // SSLVC_PLOT_HPP
