// sslvc/plot.cpp

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

#include "sslvc/plot.hpp"

#include <png.h>

#include <array>
#include <cctype>
#include <cstdio>
#include <map>
#include <memory>

#include "sslvc/errors.hpp"

namespace sslvc {

namespace {

struct Rgb {
  std::uint8_t r, g, b;
};

constexpr std::array<Rgb, 10> kPalette = {{{31, 119, 180},
                                           {255, 127, 14},
                                           {44, 160, 44},
                                           {214, 39, 40},
                                           {148, 103, 189},
                                           {140, 86, 75},
                                           {227, 119, 194},
                                           {127, 127, 127},
                                           {188, 189, 34},
                                           {23, 190, 207}}};

// 3x5 glyphs, one row per entry, bit 2 is the left column.
const std::map<char, std::array<std::uint8_t, 5>> &font() {
  static const std::map<char, std::array<std::uint8_t, 5>> glyphs = {
      {'A', {2, 5, 7, 5, 5}}, {'B', {6, 5, 6, 5, 6}}, {'C', {3, 4, 4, 4, 3}}, {'D', {6, 5, 5, 5, 6}},
      {'E', {7, 4, 6, 4, 7}}, {'F', {7, 4, 6, 4, 4}}, {'G', {3, 4, 5, 5, 3}}, {'H', {5, 5, 7, 5, 5}},
      {'I', {7, 2, 2, 2, 7}}, {'J', {1, 1, 1, 5, 2}}, {'K', {5, 5, 6, 5, 5}}, {'L', {4, 4, 4, 4, 7}},
      {'M', {5, 7, 7, 5, 5}}, {'N', {6, 5, 5, 5, 5}}, {'O', {2, 5, 5, 5, 2}}, {'P', {6, 5, 6, 4, 4}},
      {'Q', {2, 5, 5, 6, 3}}, {'R', {6, 5, 6, 5, 5}}, {'S', {3, 4, 2, 1, 6}}, {'T', {7, 2, 2, 2, 2}},
      {'U', {5, 5, 5, 5, 7}}, {'V', {5, 5, 5, 5, 2}}, {'W', {5, 5, 7, 7, 5}}, {'X', {5, 5, 2, 5, 5}},
      {'Y', {5, 5, 2, 2, 2}}, {'Z', {7, 1, 2, 4, 7}}, {'0', {7, 5, 5, 5, 7}}, {'1', {2, 6, 2, 2, 7}},
      {'2', {6, 1, 2, 4, 7}}, {'3', {6, 1, 2, 1, 6}}, {'4', {5, 5, 7, 1, 1}}, {'5', {7, 4, 6, 1, 6}},
      {'6', {3, 4, 7, 5, 7}}, {'7', {7, 1, 2, 2, 2}}, {'8', {7, 5, 7, 5, 7}}, {'9', {7, 5, 7, 1, 6}},
      {'-', {0, 0, 7, 0, 0}}, {'.', {0, 0, 0, 0, 2}}, {':', {0, 2, 0, 2, 0}}, {'/', {1, 1, 2, 4, 4}},
      {'(', {1, 2, 2, 2, 1}}, {')', {4, 2, 2, 2, 4}}, {'=', {0, 7, 0, 7, 0}}, {'_', {0, 0, 0, 0, 7}},
      {' ', {0, 0, 0, 0, 0}}};
  return glyphs;
}

class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h * 3, 255) {}

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    auto *p = &px_[(static_cast<std::size_t>(y) * w_ + x) * 3];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
  void rect(int x0, int y0, int x1, int y1, Rgb c) {
    for (int x = x0; x <= x1; ++x) {
      set(x, y0, c);
      set(x, y1, c);
    }
    for (int y = y0; y <= y1; ++y) {
      set(x0, y, c);
      set(x1, y, c);
    }
  }
  void disc(int cx, int cy, int r, Rgb c) {
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx)
        if (dx * dx + dy * dy <= r * r) set(cx + dx, cy + dy, c);
  }
  void text(int x, int y, const std::string &s, int scale, Rgb c) {
    for (char ch : s) {
      auto it = font().find(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
      if (it != font().end())
        for (int row = 0; row < 5; ++row)
          for (int col = 0; col < 3; ++col)
            if (it->second[static_cast<std::size_t>(row)] & (4 >> col))
              for (int sy = 0; sy < scale; ++sy)
                for (int sx = 0; sx < scale; ++sx) set(x + col * scale + sx, y + row * scale + sy, c);
      x += 4 * scale;
    }
  }

  void save(const std::filesystem::path &path) const {
    std::unique_ptr<FILE, int (*)(FILE *)> f(std::fopen(path.string().c_str(), "wb"), &std::fclose);
    if (!f) throw InputError("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
      png_destroy_write_struct(&png, &info);
      throw InputError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw InputError("libpng failed writing " + path.string());
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(w_), static_cast<png_uint_32>(h_), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < h_; ++y)
      png_write_row(png, const_cast<png_bytep>(&px_[static_cast<std::size_t>(y) * w_ * 3]));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }

 private:
  int w_, h_;
  std::vector<std::uint8_t> px_;
};

}  // namespace

void write_scatter_png(const std::filesystem::path &path, const std::vector<ScatterPanel> &panels,
                       const std::vector<std::string> &label_names, int panel_size) {
  if (panels.empty()) throw ParameterError("scatter plot needs at least one panel");
  if (panel_size < 64) throw ParameterError("scatter panel size must be >= 64");
  std::map<int, std::size_t> colour;
  for (const auto &p : panels) {
    if (p.points.cols() != 2) throw ShapeError("scatter panel points must be [n x 2]");
    if (static_cast<Eigen::Index>(p.labels.size()) != p.points.rows())
      throw ShapeError("scatter panel needs one label per point");
    for (int l : p.labels) colour.emplace(l, 0);
  }
  std::size_t next = 0;
  for (auto &[l, c] : colour) c = next++ % kPalette.size();

  const int title_h = 28, legend_h = 22, margin = 12;
  const int w = static_cast<int>(panels.size()) * panel_size;
  const int h = title_h + panel_size + legend_h;
  Canvas canvas(w, h);
  const Rgb ink{40, 40, 40}, frame{170, 170, 170};
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const auto &p = panels[i];
    const int x0 = static_cast<int>(i) * panel_size;
    canvas.text(x0 + margin, 8, p.title, 3, ink);
    canvas.rect(x0 + 4, title_h, x0 + panel_size - 5, title_h + panel_size - 5, frame);
    if (p.points.rows() == 0) continue;
    const Eigen::RowVector2d lo = p.points.colwise().minCoeff(), hi = p.points.colwise().maxCoeff();
    const Eigen::RowVector2d span = (hi - lo).cwiseMax(1e-12);
    const int inner = panel_size - 2 * margin - 8;
    for (Eigen::Index k = 0; k < p.points.rows(); ++k) {
      const double u = (p.points(k, 0) - lo(0)) / span(0), v = (p.points(k, 1) - lo(1)) / span(1);
      canvas.disc(x0 + 4 + margin + static_cast<int>(u * inner), title_h + margin + static_cast<int>((1.0 - v) * inner),
                  3, kPalette[colour[p.labels[static_cast<std::size_t>(k)]]]);
    }
  }
  int lx = margin;
  for (const auto &[l, c] : colour) {
    canvas.disc(lx + 4, title_h + panel_size + 9, 4, kPalette[c]);
    const std::string name = l >= 0 && static_cast<std::size_t>(l) < label_names.size()
                                 ? label_names[static_cast<std::size_t>(l)]
                                 : "S" + std::to_string(l);
    canvas.text(lx + 12, title_h + panel_size + 4, name, 2, ink);
    lx += 28 + 8 * static_cast<int>(name.size());
  }
  canvas.save(path);
}

}  // namespace sslvc
