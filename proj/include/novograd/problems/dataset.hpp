#pragma once

// Seeded synthetic classification datasets.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "novograd/error.hpp"
#include "novograd/random.hpp"

namespace novograd {

enum class DatasetTask { two_gaussians, two_moons, multiclass_blobs };

inline std::string_view to_string(DatasetTask t) {
  switch (t) {
    case DatasetTask::two_gaussians: return "two_gaussians";
    case DatasetTask::two_moons: return "two_moons";
    case DatasetTask::multiclass_blobs: return "multiclass_blobs";
  }
  return "?";
}

inline DatasetTask dataset_task_from_string(std::string_view s) {
  if (s == "two_gaussians") return DatasetTask::two_gaussians;
  if (s == "two_moons") return DatasetTask::two_moons;
  if (s == "multiclass_blobs") return DatasetTask::multiclass_blobs;
  throw Error("unknown dataset task '" + std::string(s) + "'");
}

struct DatasetSpec {
  std::uint64_t seed = 0;
  std::size_t size = 200;
  std::size_t dim = 2;
  DatasetTask task = DatasetTask::two_gaussians;
  std::size_t num_classes = 2;  // multiclass_blobs only; the others are binary
  double separation = 6.0;      // distance between class means in units of sigma (gaussians), box half-width (blobs)
  double noise = 0.1;           // two_moons jitter

  void validate() const {
    if (size == 0) throw Error("dataset size must be > 0");
    if (dim == 0) throw Error("dataset dim must be > 0");
    if (task == DatasetTask::two_moons && dim < 2) throw Error("two_moons needs dim >= 2");
    if (task == DatasetTask::multiclass_blobs && num_classes < 2) throw Error("multiclass_blobs needs >= 2 classes");
    if (!(separation >= 0.0) || !(noise >= 0.0)) throw Error("separation and noise must be >= 0");
  }

  std::size_t classes() const { return task == DatasetTask::multiclass_blobs ? num_classes : 2; }

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct Dataset {
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;  // size() x dim, row-major
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Labels cycle 0, 1, ..., C-1 so every class gets size/C examples (+-1).
inline Dataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.dim = spec.dim;
  ds.num_classes = spec.classes();
  ds.features.resize(spec.size * spec.dim);
  ds.labels.resize(spec.size);
  Rng rng(derive_seed(spec.seed, 0xda7a));

  std::vector<double> centers;
  if (spec.task == DatasetTask::multiclass_blobs) {
    centers.resize(ds.num_classes * spec.dim);
    for (auto& c : centers) c = rng.uniform(-spec.separation, spec.separation);
  }

  for (std::size_t i = 0; i < spec.size; ++i) {
    const int label = static_cast<int>(i % ds.num_classes);
    ds.labels[i] = label;
    double* x = &ds.features[i * spec.dim];
    switch (spec.task) {
      case DatasetTask::two_gaussians: {
        const double offset = (label == 0 ? -0.5 : 0.5) * spec.separation;
        for (std::size_t k = 0; k < spec.dim; ++k) x[k] = rng.normal();
        x[0] += offset;
        break;
      }
      case DatasetTask::two_moons: {
        const double theta = std::numbers::pi * rng.uniform();
        if (label == 0) {
          x[0] = std::cos(theta);
          x[1] = std::sin(theta);
        } else {
          x[0] = 1.0 - std::cos(theta);
          x[1] = 0.5 - std::sin(theta);
        }
        x[0] += spec.noise * rng.normal();
        x[1] += spec.noise * rng.normal();
        for (std::size_t k = 2; k < spec.dim; ++k) x[k] = spec.noise * rng.normal();
        break;
      }
      case DatasetTask::multiclass_blobs: {
        const double* c = &centers[static_cast<std::size_t>(label) * spec.dim];
        for (std::size_t k = 0; k < spec.dim; ++k) x[k] = c[k] + rng.normal();
        break;
      }
    }
  }
  return ds;
}

/// First `head` examples and the rest, in order.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, std::size_t head) {
  if (head > ds.size()) throw Error("split_dataset: head larger than dataset");
  Dataset a{ds.dim, ds.num_classes, {}, {}};
  Dataset b{ds.dim, ds.num_classes, {}, {}};
  a.features.assign(ds.features.begin(), ds.features.begin() + static_cast<std::ptrdiff_t>(head * ds.dim));
  a.labels.assign(ds.labels.begin(), ds.labels.begin() + static_cast<std::ptrdiff_t>(head));
  b.features.assign(ds.features.begin() + static_cast<std::ptrdiff_t>(head * ds.dim), ds.features.end());
  b.labels.assign(ds.labels.begin() + static_cast<std::ptrdiff_t>(head), ds.labels.end());
  return {std::move(a), std::move(b)};
}

/// Shortest decimal that round-trips.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// CSV: header "x0,...,x{d-1},label", one example per line.
inline void write_csv(const Dataset& ds, std::ostream& out) {
  for (std::size_t k = 0; k < ds.dim; ++k) out << 'x' << k << ',';
  out << "label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (const double v : ds.row(i)) out << format_double(v) << ',';
    out << ds.labels[i] << '\n';
  }
}

}  // namespace novograd
