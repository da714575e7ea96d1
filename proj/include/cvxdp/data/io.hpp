// Copyright 2026 The cvxdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cvxdp/core/error.hpp"
#include "cvxdp/core/json_io.hpp"
#include "cvxdp/core/rng.hpp"
#include "cvxdp/data/dataset.hpp"

namespace cvxdp::data {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

namespace internal {

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  std::uint32_t BigEndian32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes_[pos_++]);
    return v;
  }

  const unsigned char* Take(std::size_t count) {
    Need(count);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
    pos_ += count;
    return p;
  }

  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t count) const {
    Require(bytes_.size() - pos_ >= count, ErrorKind::kFormat, what_ + ": truncated file");
  }

  const std::string& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

inline void PutBigEndian32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

}  // namespace internal

struct IdxShape {
  std::uint32_t rows = 28;
  std::uint32_t cols = 28;
};

// Big-endian IDX image/label pair. Pixels are scaled by 1/255.
inline Dataset LoadIdx(const std::filesystem::path& images, const std::filesystem::path& labels,
                       IdxShape* shape = nullptr) {
  const std::string image_bytes = ReadTextFile(images);
  const std::string label_bytes = ReadTextFile(labels);
  internal::ByteReader img(image_bytes, images.string());
  internal::ByteReader lab(label_bytes, labels.string());

  const std::uint32_t magic_i = img.BigEndian32();
  Require(magic_i == kIdxImageMagic, ErrorKind::kFormat,
          images.string() + ": bad image magic " + HexDigest(magic_i));
  const std::uint32_t n = img.BigEndian32();
  IdxShape s{img.BigEndian32(), img.BigEndian32()};
  const std::uint32_t magic_l = lab.BigEndian32();
  Require(magic_l == kIdxLabelMagic, ErrorKind::kFormat,
          labels.string() + ": bad label magic " + HexDigest(magic_l));
  const std::uint32_t n_labels = lab.BigEndian32();
  Require(n == n_labels, ErrorKind::kFormat,
          "image count " + std::to_string(n) + " differs from label count " +
              std::to_string(n_labels));

  const std::size_t d = static_cast<std::size_t>(s.rows) * s.cols;
  Dataset ds;
  ds.name = images.stem().string();
  ds.normalization = "scale_1_255";
  ds.X.resize(n, static_cast<Eigen::Index>(d));
  const unsigned char* pix = img.Take(static_cast<std::size_t>(n) * d);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n) * d; ++i) {
    ds.X.data()[i] = static_cast<double>(pix[i]) / 255.0;
  }
  const unsigned char* lbl = lab.Take(n);
  ds.labels.assign(lbl, lbl + n);
  Require(img.AtEnd() && lab.AtEnd(), ErrorKind::kFormat, "IDX files have trailing bytes");
  int max_label = 0;
  for (int l : ds.labels) max_label = std::max(max_label, l);
  ds.num_classes = max_label + 1;
  if (shape) *shape = s;
  return ds;
}

inline void SaveIdx(const Dataset& ds, const std::filesystem::path& images,
                    const std::filesystem::path& labels, IdxShape shape) {
  Require(ds.IsClassification() && ds.num_classes <= 256, ErrorKind::kFormat,
          "IDX needs byte-sized class labels");
  Require(static_cast<Eigen::Index>(shape.rows) * shape.cols == ds.d(), ErrorKind::kShape,
          "IDX shape does not match the feature dimension");
  std::string img, lab;
  internal::PutBigEndian32(img, kIdxImageMagic);
  internal::PutBigEndian32(img, static_cast<std::uint32_t>(ds.n()));
  internal::PutBigEndian32(img, shape.rows);
  internal::PutBigEndian32(img, shape.cols);
  for (Eigen::Index i = 0; i < ds.X.size(); ++i) {
    const double v = std::clamp(std::round(ds.X.data()[i] * 255.0), 0.0, 255.0);
    img.push_back(static_cast<char>(static_cast<unsigned char>(v)));
  }
  internal::PutBigEndian32(lab, kIdxLabelMagic);
  internal::PutBigEndian32(lab, static_cast<std::uint32_t>(ds.n()));
  for (int l : ds.labels) lab.push_back(static_cast<char>(static_cast<unsigned char>(l)));
  WriteTextFile(images, img);
  WriteTextFile(labels, lab);
}

enum class CsvTarget { kAuto, kClass, kReal };

// Header row, then numeric rows whose last column is the label or target.
// kAuto treats the last column as class labels when every value is a
// non-negative integer.
inline Dataset LoadCsv(const std::filesystem::path& path, CsvTarget target = CsvTarget::kAuto) {
  const std::string text = ReadTextFile(path);
  std::istringstream in(text);
  std::string line;
  Require(static_cast<bool>(std::getline(in, line)), ErrorKind::kFormat,
          path.string() + ": missing header row");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  Require(columns >= 2, ErrorKind::kFormat, path.string() + ": need a feature and a label column");

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t fields = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      std::string_view field = rest.substr(0, comma);
      while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
      while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      Require(ec == std::errc() && ptr == field.data() + field.size(), ErrorKind::kFormat,
              path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                  std::string(field) + "'");
      values.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    Require(fields == columns, ErrorKind::kFormat,
            path.string() + ":" + std::to_string(line_no) + ": expected " +
                std::to_string(columns) + " fields, found " + std::to_string(fields));
    ++rows;
  }

  const std::size_t d = columns - 1;
  Dataset ds;
  ds.name = path.stem().string();
  ds.X.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
  Eigen::VectorXd last(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < d; ++c) ds.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * columns + c];
    last(static_cast<Eigen::Index>(r)) = values[r * columns + d];
  }
  bool integral = true;
  for (double v : last) integral = integral && v >= 0.0 && v < 1e6 && v == std::floor(v);
  const bool classify = target == CsvTarget::kClass || (target == CsvTarget::kAuto && integral);
  if (classify) {
    Require(integral, ErrorKind::kFormat, path.string() + ": labels must be non-negative integers");
    ds.labels.resize(rows);
    int max_label = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      ds.labels[r] = static_cast<int>(last(static_cast<Eigen::Index>(r)));
      max_label = std::max(max_label, ds.labels[r]);
    }
    ds.num_classes = max_label + 1;
  } else {
    ds.targets = last;
  }
  ds.Validate();
  return ds;
}

inline std::string FormatDouble(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline void SaveCsv(const Dataset& ds, const std::filesystem::path& path) {
  std::string out;
  for (Eigen::Index c = 0; c < ds.d(); ++c) out += "x" + std::to_string(c) + ",";
  out += ds.IsClassification() ? "label\n" : "target\n";
  for (Eigen::Index r = 0; r < ds.n(); ++r) {
    for (Eigen::Index c = 0; c < ds.d(); ++c) out += FormatDouble(ds.X(r, c)) + ",";
    out += ds.IsClassification() ? std::to_string(ds.labels[static_cast<std::size_t>(r)])
                                 : FormatDouble(ds.targets(r));
    out += "\n";
  }
  WriteTextFile(path, out);
}

}  // namespace cvxdp::data
