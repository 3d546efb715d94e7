#include "cgpkit/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>

#include "cgpkit/csv.hpp"
#include "cgpkit/errors.hpp"
#include "cgpkit/random.hpp"

namespace cgpkit {

std::string_view to_string(Transform t) { return t == Transform::Log ? "Log" : "None"; }

Transform transform_from_string(std::string_view name) {
  if (name == "None" || name == "none") return Transform::None;
  if (name == "Log" || name == "log") return Transform::Log;
  throw InvalidTransform("unknown transform '" + std::string(name) + "'");
}

void TimeSeries::validate() const {
  if (t.size() != y.size()) throw DimensionMismatch("time series: t and y differ in length");
  if (!t.allFinite() || !y.allFinite()) throw InvalidInput("time series: non-finite values");
  for (Index i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw InvalidInput("time series: timestamps not strictly increasing");
  }
}

DataSegment TimeSeries::as_segment() const { return {Inputs(t), y}; }

SimulatedSeries simulate_gp_series(const SeriesConfig& config) {
  const std::size_t n = config.n_train + config.n_test;
  if (n == 0) throw InvalidInput("simulate_gp_series: no points requested");
  const Inputs t = Vector::LinSpaced(static_cast<Index>(n), 0.0, static_cast<double>(n - 1))
                           .array() * config.spacing + config.t0;
  const GaussianSampler latent(config.model.mean.evaluate(t),
                               PsdMatrix(cross_covariance(config.model.kernel, t, t)));
  RandomStream rng(config.seed);
  const Vector f = latent.draw(rng);
  const double sd = std::sqrt(config.model.kernel.params.noise_var());
  Vector y = f;
  for (Index i = 0; i < y.size(); ++i) y[i] += sd * rng.normal();

  const auto ntr = static_cast<Index>(config.n_train);
  const auto nte = static_cast<Index>(config.n_test);
  SimulatedSeries out;
  out.train = {t.col(0).head(ntr), y.head(ntr), Transform::None};
  out.test = {t.col(0).tail(nte), y.tail(nte), Transform::None};
  out.train_latent = f.head(ntr);
  out.test_latent = f.tail(nte);
  return out;
}

DataSegment GrfSample::train() const {
  DataSegment seg{Inputs(static_cast<Index>(train_index.size()), 2),
                  Vector(static_cast<Index>(train_index.size()))};
  for (std::size_t i = 0; i < train_index.size(); ++i) {
    seg.X.row(static_cast<Index>(i)) = coords.row(train_index[i]);
    seg.y[static_cast<Index>(i)] = observed[train_index[i]];
  }
  return seg;
}

Inputs GrfSample::test_inputs() const {
  Inputs X(static_cast<Index>(test_index.size()), 2);
  for (std::size_t i = 0; i < test_index.size(); ++i) {
    X.row(static_cast<Index>(i)) = coords.row(test_index[i]);
  }
  return X;
}

Vector GrfSample::test_field() const {
  Vector v(static_cast<Index>(test_index.size()));
  for (std::size_t i = 0; i < test_index.size(); ++i) v[static_cast<Index>(i)] = field[test_index[i]];
  return v;
}

GrfSample simulate_grf(const GrfConfig& config) {
  if (config.nx == 0 || config.ny == 0 || config.nx > 64 || config.ny > 64) {
    throw InvalidInput("simulate_grf: grid must be between 1x1 and 64x64");
  }
  GrfSample s;
  s.nx = config.nx;
  s.ny = config.ny;
  const auto n = static_cast<Index>(config.nx * config.ny);
  s.coords.resize(n, 2);
  for (std::size_t i = 0; i < config.nx; ++i) {
    for (std::size_t j = 0; j < config.ny; ++j) {
      s.coords.row(static_cast<Index>(i * config.ny + j))
          << static_cast<double>(i), static_cast<double>(j);
    }
  }
  const KernelSpec kernel =
      make_se2d_ard(config.alpha, config.theta1, config.theta2, config.noise_var);
  const GaussianSampler sampler(Vector::Zero(n),
                                PsdMatrix(cross_covariance(kernel, s.coords, s.coords)));
  RandomStream rng(config.seed);
  s.field = sampler.draw(rng);
  s.observed = s.field;
  const double sd = std::sqrt(config.noise_var);
  for (Index i = 0; i < n; ++i) s.observed[i] += sd * rng.normal();

  const std::size_t tnx =
      config.test_nx ? config.test_nx : std::max<std::size_t>(1, config.nx / 4);
  const std::size_t tny =
      config.test_ny ? config.test_ny : std::max<std::size_t>(1, config.ny / 2);
  if (tnx > config.nx || tny > config.ny) throw InvalidInput("simulate_grf: test block too large");
  const std::size_t i0 = (config.nx - tnx) / 2;
  const std::size_t j0 = (config.ny - tny) / 2;
  for (std::size_t i = 0; i < config.nx; ++i) {
    for (std::size_t j = 0; j < config.ny; ++j) {
      const auto r = static_cast<Index>(i * config.ny + j);
      const bool in_test = i >= i0 && i < i0 + tnx && j >= j0 && j < j0 + tny;
      (in_test ? s.test_index : s.train_index).push_back(r);
    }
  }
  return s;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

bool is_missing(std::string_view s) {
  s = trim(s);
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

// Days since 1970-01-01 in the proleptic Gregorian calendar.
long days_from_civil(long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) return -1;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return -1;
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

}  // namespace

double parse_iso8601_hours(std::string_view text) {
  const std::string_view s = trim(text);
  auto fail = [&]() -> double {
    throw InvalidInput("not an ISO-8601 timestamp: '" + std::string(s) + "'");
  };
  const int year = digits(s, 0, 4);
  const int month = digits(s, 5, 2);
  const int day = digits(s, 8, 2);
  if (year < 0 || month < 1 || month > 12 || day < 1 || day > 31 || s[4] != '-' || s[7] != '-') {
    return fail();
  }
  double hours = 24.0 * static_cast<double>(days_from_civil(year, static_cast<unsigned>(month),
                                                            static_cast<unsigned>(day)));
  std::size_t pos = 10;
  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != ' ') return fail();
    const int hh = digits(s, pos + 1, 2);
    const int mm = digits(s, pos + 4, 2);
    if (hh < 0 || hh > 24 || mm < 0 || mm > 59 || s[pos + 3] != ':') return fail();
    hours += hh + mm / 60.0;
    pos += 6;
    if (pos < s.size() && s[pos] == ':') {
      const int ss = digits(s, pos + 1, 2);
      if (ss < 0 || ss > 60) return fail();
      hours += ss / 3600.0;
      pos += 3;
    }
    if (pos < s.size() && s[pos] == 'Z') ++pos;
    if (pos != s.size()) return fail();
  }
  return hours;
}

IngestResult ingest_csv(const std::filesystem::path& path, std::string_view timestamp_column,
                        std::string_view value_column, Transform transform) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::vector<CsvRow> rows = read_csv(in);
  if (rows.empty()) throw EmptySeries("'" + path.string() + "' has no header row");

  const auto& header = rows.front().fields;
  auto column = [&](std::string_view name) {
    const auto it = std::find_if(header.begin(), header.end(),
                                 [&](const std::string& h) { return trim(h) == name; });
    if (it == header.end()) {
      throw ParseError("missing column '" + std::string(name) + "'", rows.front().line);
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t tcol = column(timestamp_column);
  const std::size_t vcol = column(value_column);

  enum class TimeFormat { Unknown, Number, Iso };
  TimeFormat format = TimeFormat::Unknown;
  struct Point {
    double t;
    double y;
    std::size_t line;
  };
  std::vector<Point> points;
  IngestResult result;

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    if (row.fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(row.fields.size()),
                       row.line);
    }
    const std::string_view ts = row.fields[tcol];
    const std::string_view vs = row.fields[vcol];
    if (is_missing(ts) || is_missing(vs)) {
      ++result.dropped;
      continue;
    }
    if (format == TimeFormat::Unknown) {
      format = parse_number(ts) ? TimeFormat::Number : TimeFormat::Iso;
    }
    double t = 0.0;
    if (format == TimeFormat::Number) {
      const auto v = parse_number(ts);
      if (!v || !std::isfinite(*v)) throw ParseError("bad timestamp '" + std::string(ts) + "'", row.line);
      t = *v;
    } else {
      try {
        t = parse_iso8601_hours(ts);
      } catch (const InvalidInput&) {
        throw ParseError("bad timestamp '" + std::string(ts) + "'", row.line);
      }
    }
    const auto value = parse_number(vs);
    if (!value || !std::isfinite(*value)) {
      throw ParseError("bad value '" + std::string(vs) + "'", row.line);
    }
    if (transform == Transform::Log) {
      if (*value <= 0.0) {
        ++result.dropped;
        continue;
      }
      points.push_back({t, std::log(*value), row.line});
    } else {
      points.push_back({t, *value, row.line});
    }
  }
  if (points.empty()) throw EmptySeries("'" + path.string() + "' has no usable rows");

  std::stable_sort(points.begin(), points.end(),
                   [](const Point& a, const Point& b) { return a.t < b.t; });
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].t == points[i - 1].t) throw ParseError("duplicate timestamp", points[i].line);
  }
  result.series.transform = transform;
  result.series.t.resize(static_cast<Index>(points.size()));
  result.series.y.resize(static_cast<Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    result.series.t[static_cast<Index>(i)] = points[i].t;
    result.series.y[static_cast<Index>(i)] = points[i].y;
  }
  return result;
}

void write_csv(const TimeSeries& series, const std::filesystem::path& path,
               std::string_view timestamp_column, std::string_view value_column) {
  series.validate();
  CsvTable table({std::string(timestamp_column), std::string(value_column)});
  for (Index i = 0; i < series.size(); ++i) {
    table.add_row({format_double(series.t[i]), format_double(series.y[i])});
  }
  table.write(path);
}

BackTransformed back_transform(const GaussianBelief& belief, Transform transform) {
  if (transform != Transform::Log) {
    throw InvalidTransform("back_transform: only Log-transformed beliefs can be mapped back");
  }
  constexpr double z975 = 1.959963984540054;
  const Vector sd = belief.variance().cwiseMax(0.0).cwiseSqrt();
  return {belief.mean.array().exp(), (belief.mean - z975 * sd).array().exp(),
          (belief.mean + z975 * sd).array().exp()};
}

std::vector<DataSegment> segment_contiguous(const DataSegment& all, const Segmentation& seg) {
  if ((seg.count == 0) == (seg.size == 0)) {
    throw InvalidInput("segmentation: exactly one of count and size must be set");
  }
  const auto n = static_cast<std::size_t>(all.size());
  if (n == 0) throw InvalidInput("segmentation: no data");
  std::vector<std::size_t> sizes;
  if (seg.count) {
    if (seg.count > n) throw InvalidInput("segmentation: more segments than points");
    for (std::size_t k = 0; k < seg.count; ++k) {
      sizes.push_back(n / seg.count + (k < n % seg.count ? 1 : 0));
    }
  } else {
    for (std::size_t off = 0; off < n; off += seg.size) sizes.push_back(std::min(seg.size, n - off));
  }
  std::vector<DataSegment> out;
  Index offset = 0;
  for (const std::size_t s : sizes) {
    const auto len = static_cast<Index>(s);
    out.push_back({all.X.middleRows(offset, len), all.y.segment(offset, len)});
    offset += len;
  }
  return out;
}

TimeSeries synthetic_lognormal_series(std::size_t n, std::uint64_t seed) {
  SeriesConfig cfg;
  cfg.model.kernel = make_periodic_plus_se(0.6, 1.0, 0.5, 72.0, 24.0, 0.05);
  cfg.model.mean = {MeanFamily::Linear, 0.0, 3.5};
  cfg.n_train = n;
  cfg.seed = seed;
  const SimulatedSeries sim = simulate_gp_series(cfg);
  return {sim.train.t, sim.train.y.array().exp(), Transform::None};
}

}  // namespace cgpkit
