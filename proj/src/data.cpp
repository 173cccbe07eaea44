#include "mgcast/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace mgcast {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// strict numeric parse; rejects non-finite and trailing junk
bool parse_cell(const std::string& raw, double& out) {
    const std::string s = trim(raw);
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) return false;
    return std::isfinite(out);
}

}  // namespace

RawSeries load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file: " + path);

    RawSeries series;
    series.name = path;

    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    std::vector<double> flat;

    if (schema.header) {
        if (!std::getline(in, line)) throw DataError(path + ": missing header row");
        ++line_no;
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() && in.peek() == EOF) break;  // trailing newline
        const std::vector<std::string> cells = split_line(line);
        const std::size_t first_value = schema.date_column ? 1 : 0;
        if (cells.size() <= first_value)
            throw DataError(path + ": row " + std::to_string(line_no) + " has no value columns");
        const std::size_t row_dim = cells.size() - first_value;
        if (dim == 0) {
            dim = row_dim;
        } else if (row_dim != dim) {
            throw DataError(path + ": ragged row " + std::to_string(line_no) + " has " +
                            std::to_string(row_dim) + " value columns, expected " +
                            std::to_string(dim));
        }
        if (schema.date_column) series.timestamps.push_back(cells[0]);
        for (std::size_t c = 0; c < dim; ++c) {
            double v;
            if (!parse_cell(cells[first_value + c], v))
                throw DataError(path + ": non-numeric cell at row " + std::to_string(line_no) +
                                ", column " + std::to_string(first_value + c + 1) + ": '" +
                                trim(cells[first_value + c]) + "'");
            flat.push_back(v);
        }
    }

    if (flat.empty()) throw DataError(path + ": no data rows");
    series.values.rows = flat.size() / dim;
    series.values.cols = dim;
    series.values.data = std::move(flat);
    return series;
}

RawSeries make_two_tone_series(std::size_t len) {
    RawSeries series;
    series.name = "synthetic-two-tone";
    series.values = Matrix(len, 1);
    constexpr double kTau = 6.283185307179586476925286766559;
    for (std::size_t t = 0; t < len; ++t) {
        const double x = static_cast<double>(t);
        series.values.data[t] = std::sin(kTau * x / 24.0) + 0.7 * std::sin(kTau * x / 75.0);
    }
    return series;
}

void SplitSpec::validate() const {
    if (train_frac <= 0.0 || val_frac < 0.0 || test_frac < 0.0)
        throw ConfigError("split fractions must be positive (train) and non-negative");
    const double sum = train_frac + val_frac + test_frac;
    if (std::fabs(sum - 1.0) > 1e-9)
        throw ConfigError("split fractions sum to " + std::to_string(sum) + ", expected 1");
}

SplitRanges split(std::size_t len, const SplitSpec& spec) {
    spec.validate();
    SplitRanges r;
    r.train_begin = 0;
    r.train_end = static_cast<std::size_t>(std::floor(static_cast<double>(len) * spec.train_frac));
    r.val_begin = r.train_end;
    r.val_end = static_cast<std::size_t>(
        std::floor(static_cast<double>(len) * (spec.train_frac + spec.val_frac)));
    r.test_begin = r.val_end;
    r.test_end = len;
    return r;
}

Standardizer fit_standardizer(const Matrix& values, std::size_t row_begin, std::size_t row_end) {
    if (row_end <= row_begin || row_end > values.rows)
        throw DataError("fit_standardizer: empty or out-of-range train split");
    const std::size_t n = row_end - row_begin;
    Standardizer s;
    s.mean.assign(values.cols, 0.0);
    s.stddev.assign(values.cols, 0.0);
    for (std::size_t i = row_begin; i < row_end; ++i)
        for (std::size_t c = 0; c < values.cols; ++c) s.mean[c] += values.at(i, c);
    for (double& m : s.mean) m /= static_cast<double>(n);
    for (std::size_t i = row_begin; i < row_end; ++i)
        for (std::size_t c = 0; c < values.cols; ++c) {
            const double d = values.at(i, c) - s.mean[c];
            s.stddev[c] += d * d;
        }
    for (double& v : s.stddev) v = std::sqrt(v / static_cast<double>(n));
    return s;
}

Matrix Standardizer::apply(const Matrix& values) const {
    if (values.cols != mean.size())
        throw DimensionError("standardizer fitted on " + std::to_string(mean.size()) +
                             " channels, data has " + std::to_string(values.cols));
    Matrix z(values.rows, values.cols);
    for (std::size_t i = 0; i < values.rows; ++i)
        for (std::size_t c = 0; c < values.cols; ++c) z.at(i, c) = apply_one(values.at(i, c), c);
    return z;
}

Matrix Standardizer::invert(const Matrix& values) const {
    if (values.cols != mean.size())
        throw DimensionError("standardizer fitted on " + std::to_string(mean.size()) +
                             " channels, data has " + std::to_string(values.cols));
    Matrix x(values.rows, values.cols);
    for (std::size_t i = 0; i < values.rows; ++i)
        for (std::size_t c = 0; c < values.cols; ++c) x.at(i, c) = invert_one(values.at(i, c), c);
    return x;
}

WindowedDataset::WindowedDataset(std::shared_ptr<const Matrix> standardized,
                                 std::size_t row_begin, std::size_t row_end,
                                 std::size_t input_len, std::size_t output_len)
    : z_(std::move(standardized)),
      row_begin_(row_begin),
      row_end_(row_end),
      input_len_(input_len),
      output_len_(output_len) {
    if (row_end_ > z_->rows || row_begin_ > row_end_)
        throw DataError("window range out of bounds");
    const std::size_t split_len = row_end_ - row_begin_;
    if (split_len < input_len_ + output_len_)
        throw ConfigError("split of length " + std::to_string(split_len) +
                          " is shorter than input_len + output_len = " +
                          std::to_string(input_len_ + output_len_));
    windows_per_channel_ = split_len - input_len_ - output_len_ + 1;
}

void WindowedDataset::fill(std::size_t idx, Vector& input, Vector& target) const {
    const std::size_t c = channel_of(idx);
    const std::size_t s = start_of(idx);
    input.resize(input_len_);
    target.resize(output_len_);
    for (std::size_t t = 0; t < input_len_; ++t) input[t] = z_->at(s + t, c);
    for (std::size_t t = 0; t < output_len_; ++t) target[t] = z_->at(s + input_len_ + t, c);
}

std::optional<DatasetPreset> dataset_preset(const std::string& name) {
    // Split protocol is 70/10/20 except ETTm2 (60/20/20); expected_dim and
    // expected_len record the published feature table for the canonical
    // files and are checked advisorily by the pipeline.
    static const std::vector<DatasetPreset> presets = {
        {"ettm2", {0.6, 0.2, 0.2}, 7, 69680},
        {"electricity", {0.7, 0.1, 0.2}, 321, 26304},
        {"exchange", {0.7, 0.1, 0.2}, 8, 7588},
        {"traffic", {0.7, 0.1, 0.2}, 862, 17544},
        {"weather", {0.7, 0.1, 0.2}, 21, 52696},
        {"ili", {0.7, 0.1, 0.2}, 8, 966},
        {"synthetic-two-tone", {0.7, 0.1, 0.2}, 1, 2000},
    };
    for (const auto& p : presets)
        if (p.name == name) return p;
    return std::nullopt;
}

std::vector<std::string> dataset_preset_names() {
    return {"ettm2", "electricity", "exchange", "traffic", "weather", "ili",
            "synthetic-two-tone"};
}

}  // namespace mgcast
