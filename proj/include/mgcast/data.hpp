// CSV ingestion, chronological splitting, train-statistics standardization,
// and stride-1 sliding-window extraction with channel flattening. Windows
// never cross split boundaries; metrics run on the standardized scale.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mgcast/matrix.hpp"

namespace mgcast {

struct CsvSchema {
    bool header = true;       // one header row expected
    bool date_column = true;  // optional leading date column, kept as opaque strings
};

struct RawSeries {
    std::string name;
    std::vector<std::string> timestamps;  // empty when no date column
    Matrix values;                        // len x dim

    std::size_t len() const { return values.rows; }
    std::size_t dim() const { return values.cols; }
};

RawSeries load_csv(const std::string& path, const CsvSchema& schema);

// Deterministic noiseless two-tone sinusoid used by the self-contained
// trainer checks: x(t) = sin(2 pi t / 24) + 0.7 sin(2 pi t / 75).
RawSeries make_two_tone_series(std::size_t len);

struct SplitSpec {
    double train_frac = 0.7;
    double val_frac = 0.1;
    double test_frac = 0.2;

    void validate() const;  // fractions sum to 1 within 1e-9
};

struct SplitRanges {
    // half-open row ranges [begin, end)
    std::size_t train_begin = 0, train_end = 0;
    std::size_t val_begin = 0, val_end = 0;
    std::size_t test_begin = 0, test_end = 0;
};

// Boundaries at floor(len*train) and floor(len*(train+val)).
SplitRanges split(std::size_t len, const SplitSpec& spec);

struct Standardizer {
    Vector mean;  // per channel
    Vector stddev;
    double eps = 1e-8;

    double apply_one(double x, std::size_t c) const {
        return (x - mean[c]) / std::max(stddev[c], eps);
    }
    double invert_one(double z, std::size_t c) const {
        return z * std::max(stddev[c], eps) + mean[c];
    }
    Matrix apply(const Matrix& values) const;
    Matrix invert(const Matrix& values) const;
};

// Population (biased) standard deviation over the train rows only.
Standardizer fit_standardizer(const Matrix& values, std::size_t row_begin, std::size_t row_end);

// One split's standardized windows, channel-flattened. Window i maps to
// channel i / windows_per_channel and start i % windows_per_channel, so
// iteration order is channel-major, start-ascending.
class WindowedDataset {
  public:
    WindowedDataset(std::shared_ptr<const Matrix> standardized, std::size_t row_begin,
                    std::size_t row_end, std::size_t input_len, std::size_t output_len);

    std::size_t size() const { return windows_per_channel_ * z_->cols; }
    std::size_t windows_per_channel() const { return windows_per_channel_; }
    std::size_t input_len() const { return input_len_; }
    std::size_t output_len() const { return output_len_; }
    std::size_t channel_of(std::size_t idx) const { return idx / windows_per_channel_; }
    std::size_t start_of(std::size_t idx) const { return row_begin_ + idx % windows_per_channel_; }

    void fill(std::size_t idx, Vector& input, Vector& target) const;

  private:
    std::shared_ptr<const Matrix> z_;
    std::size_t row_begin_, row_end_;
    std::size_t input_len_, output_len_;
    std::size_t windows_per_channel_;
};

// Named presets for the six benchmark series (split protocol and the
// feature count the literature reports for the canonical files).
struct DatasetPreset {
    std::string name;
    SplitSpec split;
    std::size_t expected_dim = 0;
    std::size_t expected_len = 0;
};

std::optional<DatasetPreset> dataset_preset(const std::string& name);
std::vector<std::string> dataset_preset_names();

}  // namespace mgcast
