// Copyright 2026 The collapse-lab Authors
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

#include "collapse_lab/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "collapse_lab/error.hpp"

namespace collapse_lab {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string field_csv(const WaveField<double>& wf) {
  std::string out = "x,re,im,density\n";
  for (Index i = 0; i < wf.grid.n_points(); ++i) {
    const auto a = wf.amplitudes[i];
    out += format_double(wf.grid.x(i));
    out += ',';
    out += format_double(a.real());
    out += ',';
    out += format_double(a.imag());
    out += ',';
    out += format_double(std::norm(a));
    out += '\n';
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::InvalidArgument, "sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read '" + path.string() + "'");
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(data);
}

std::string frequency_chart_svg(std::span<const double> frequencies, std::span<const double> born_weights) {
  const std::size_t n = std::min(frequencies.size(), born_weights.size());
  const double width = 80.0 + 90.0 * static_cast<double>(n);
  const double height = 260.0;
  const double base = 220.0;
  const double scale = 180.0;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  svg << "<line x1=\"40\" y1=\"" << base << "\" x2=\"" << width - 20 << "\" y2=\"" << base
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"40\" y1=\"" << base << "\" x2=\"40\" y2=\"" << base - scale << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"44\" y=\"" << base - scale + 4 << "\" font-size=\"10\">1.0</text>\n";
  for (std::size_t j = 0; j < n; ++j) {
    const double x = 60.0 + 90.0 * static_cast<double>(j);
    const double hf = scale * frequencies[j];
    const double hb = scale * born_weights[j];
    svg << "<rect x=\"" << x << "\" y=\"" << base - hf << "\" width=\"30\" height=\"" << hf
        << "\" fill=\"steelblue\"/>\n";
    svg << "<rect x=\"" << x + 32 << "\" y=\"" << base - hb << "\" width=\"30\" height=\"" << hb
        << "\" fill=\"darkorange\"/>\n";
    svg << "<text x=\"" << x + 10 << "\" y=\"" << base + 15 << "\" font-size=\"11\">grain " << j << "</text>\n";
  }
  svg << "<text x=\"60\" y=\"" << base + 35 << "\" font-size=\"11\" fill=\"steelblue\">observed</text>\n";
  svg << "<text x=\"140\" y=\"" << base + 35 << "\" font-size=\"11\" fill=\"darkorange\">Born weight</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace collapse_lab
