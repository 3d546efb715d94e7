#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cgpkit/gp.hpp"

namespace cgpkit {

enum class Transform { None, Log };

std::string_view to_string(Transform t);
Transform transform_from_string(std::string_view name);

struct TimeSeries {
  Vector t;
  Vector y;
  Transform transform = Transform::None;

  Index size() const { return t.size(); }
  /// Strictly increasing t, matching lengths, finite values.
  void validate() const;
  DataSegment as_segment() const;
};

struct SimulatedSeries {
  TimeSeries train;
  TimeSeries test;
  Vector train_latent;
  Vector test_latent;
};

struct SeriesConfig {
  GpModel model;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
  double t0 = 0.0;
  double spacing = 1.0;
};

/// One joint draw of n_train + n_test latent values at t0 + i * spacing plus
/// i.i.d. observation noise. The last n_test points form the test split.
SimulatedSeries simulate_gp_series(const SeriesConfig& config);

struct GrfConfig {
  std::size_t nx = 64;
  std::size_t ny = 64;
  double alpha = 1.0;
  double theta1 = 8.0;
  double theta2 = 8.0;
  double noise_var = 1e-2;
  std::uint64_t seed = 0;
  /// Test block size; 0 picks nx / 4 by ny / 2 (16 x 32 on a 64 x 64 grid).
  std::size_t test_nx = 0;
  std::size_t test_ny = 0;
};

/// Field on an integer grid. Cell (i, j) sits at coordinates (i, j) and row
/// i * ny + j. The test cells are an axis-aligned block centred in the grid.
struct GrfSample {
  std::size_t nx = 0;
  std::size_t ny = 0;
  Inputs coords;
  Vector field;
  Vector observed;
  std::vector<Index> train_index;
  std::vector<Index> test_index;

  DataSegment train() const;
  Inputs test_inputs() const;
  Vector test_field() const;
};

/// Samples the SE2D-ARD field by a jittered Cholesky of the full grid Gram.
GrfSample simulate_grf(const GrfConfig& config);

struct IngestResult {
  TimeSeries series;
  std::size_t dropped = 0;
};

/// Reads a headed CSV. Timestamps are integer (or decimal) hours, or ISO-8601
/// date-times converted to hours since 1970-01-01T00:00Z; the format is fixed
/// by the first non-empty timestamp of the column. Rows with a missing value
/// (empty, NA, NaN) or a non-positive value under Log are dropped and counted.
/// The result is sorted by time.
IngestResult ingest_csv(const std::filesystem::path& path, std::string_view timestamp_column,
                        std::string_view value_column, Transform transform);

/// Writes t and y exactly as stored.
void write_csv(const TimeSeries& series, const std::filesystem::path& path,
               std::string_view timestamp_column = "timestamp",
               std::string_view value_column = "value");

/// Hours since the Unix epoch for an ISO-8601 date or date-time; throws
/// InvalidInput if the text is not one.
double parse_iso8601_hours(std::string_view text);

struct BackTransformed {
  Vector median;
  Vector lower;  // 2.5 %
  Vector upper;  // 97.5 %
};

/// Per-point median and 95 % interval on the original scale of a log-transformed
/// belief. Throws InvalidTransform unless transform is Log.
BackTransformed back_transform(const GaussianBelief& belief, Transform transform);

/// Exactly one of count / size is nonzero.
struct Segmentation {
  std::size_t count = 0;
  std::size_t size = 0;
};

/// Contiguous blocks in the given order. By count, sizes differ by at most one
/// (earlier blocks are longer); by size, the last block may be short.
std::vector<DataSegment> segment_contiguous(const DataSegment& all, const Segmentation& seg);

/// Positive, right-skewed hourly series whose log is a GP draw with a 24-hour
/// periodic component; a stand-in for real pollutant measurements.
TimeSeries synthetic_lognormal_series(std::size_t n, std::uint64_t seed);

}  // namespace cgpkit
