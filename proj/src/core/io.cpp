#include "core/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace ecrisk {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& raw, double& out) {
  const std::string text = trim(raw);
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end && std::isfinite(out);
}

bool blank_record(const std::vector<std::string>& record) {
  return std::all_of(record.begin(), record.end(), [](const std::string& f) { return trim(f).empty(); });
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("error while writing '" + path + "'");
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text, const std::string& source) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    if (ch == '"' && trim(field).empty()) {
      field.clear();
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (field_started || !field.empty() || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      field_started = false;
      ++line;
    } else {
      field += ch;
      field_started = true;
    }
  }
  if (quoted) {
    std::ostringstream msg;
    msg << source << ": unterminated quoted field near line " << line;
    throw IoError(msg.str());
  }
  if (field_started || !field.empty() || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::string sample_to_csv(const SampleMatrix& data) {
  std::string out;
  out.reserve(data.rows() * data.cols() * 24);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(data(i, j));
    }
    out += '\n';
  }
  return out;
}

SampleMatrix sample_from_csv(const std::string& text, const std::string& source) {
  const auto records = parse_csv(text, source);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (blank_record(records[r])) continue;
    if (cols == 0) cols = records[r].size();
    if (records[r].size() != cols) {
      std::ostringstream msg;
      msg << source << ": row " << r + 1 << " has " << records[r].size() << " fields, expected " << cols;
      throw IoError(msg.str());
    }
    for (std::size_t j = 0; j < cols; ++j) {
      double v = 0.0;
      if (!parse_double(records[r][j], v)) {
        std::ostringstream msg;
        msg << source << ": row " << r + 1 << ", column " << j + 1 << ": '" << records[r][j]
            << "' is not a finite number";
        throw IoError(msg.str());
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw IoError(source + ": empty table");
  return SampleMatrix(rows, cols, std::move(values));
}

SampleMatrix read_sample_csv(const std::string& path) { return sample_from_csv(read_text_file(path), path); }

void write_sample_csv(const std::string& path, const SampleMatrix& data) {
  write_text_file(path, sample_to_csv(data));
}

ReturnsTable parse_returns(const std::string& text, const std::vector<std::string>& covariates,
                           const std::string& target, const std::string& source) {
  if (covariates.empty()) throw DomainError("returns table: at least one covariate column is required");
  if (std::find(covariates.begin(), covariates.end(), target) != covariates.end())
    throw DomainError("returns table: target column '" + target + "' is also listed as a covariate");
  auto records = parse_csv(text, source);
  records.erase(std::remove_if(records.begin(), records.end(), blank_record), records.end());
  if (records.empty()) throw IoError(source + ": empty table (no header row)");
  std::vector<std::string> header;
  for (const auto& h : records.front()) header.push_back(trim(h));
  if (records.size() == 1) throw IoError(source + ": empty table (header only)");

  std::vector<std::string> names = covariates;
  names.push_back(target);
  std::vector<std::size_t> index;
  std::vector<std::string> missing;
  for (const auto& name : names) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) missing.push_back(name);
    else index.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  if (!missing.empty()) {
    std::string msg = source + ": missing column(s)";
    for (const auto& m : missing) msg += " '" + m + "'";
    throw IoError(msg);
  }
  const bool has_dates = std::find(index.begin(), index.end(), 0) == index.end();

  ReturnsTable table;
  table.names = names;
  std::vector<double> values;
  std::vector<std::string> bad;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::size_t row_number = r + 1;
    if (rec.size() != header.size()) {
      std::ostringstream msg;
      msg << "row " << row_number << " has " << rec.size() << " fields, header has " << header.size();
      bad.push_back(msg.str());
      continue;
    }
    for (std::size_t j = 0; j < index.size(); ++j) {
      double v = 0.0;
      if (!parse_double(rec[index[j]], v)) {
        std::ostringstream msg;
        msg << "row " << row_number << " column '" << names[j] << "' = '" << rec[index[j]] << "'";
        bad.push_back(msg.str());
        break;
      }
      values.push_back(v);
    }
    if (has_dates) table.dates.push_back(trim(rec[0]));
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << source << ": " << bad.size() << " row(s) with unparseable cells:";
    for (std::size_t i = 0; i < std::min<std::size_t>(bad.size(), 10); ++i) msg << " [" << bad[i] << "]";
    if (bad.size() > 10) msg << " ...";
    throw IoError(msg.str());
  }
  const std::size_t rows = values.size() / names.size();
  table.values = SampleMatrix(rows, names.size(), std::move(values));
  return table;
}

ReturnsTable load_returns(const std::string& path, const std::vector<std::string>& covariates,
                          const std::string& target) {
  return parse_returns(read_text_file(path), covariates, target, path);
}

MomentEstimate estimate_moments(const SampleMatrix& values, const std::vector<std::string>& names) {
  const std::size_t n = values.rows();
  const std::size_t d = values.cols();
  if (d < 1) throw DomainError("estimate_moments: no columns");
  if (n < d + 1) {
    std::ostringstream msg;
    msg << "estimate_moments: need at least " << d + 1 << " rows for " << d << " columns, got " << n;
    throw DomainError(msg.str());
  }
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(d);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      values.data().data(), rows, cols);
  MomentEstimate out;
  out.mu = m.colwise().mean().transpose();
  const Eigen::MatrixXd centered = m.rowwise() - out.mu.transpose();
  const Eigen::MatrixXd s = centered.transpose() * centered / static_cast<double>(n - 1);
  out.sigma = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.sigma);
  const Eigen::VectorXd ev = eig.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  if (!(ev.minCoeff() > 1e-12 * largest)) {
    // Name the columns carrying the null direction.
    const Eigen::VectorXd null_dir = eig.eigenvectors().col(0);
    std::string involved;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (std::fabs(null_dir(j)) > 0.1) {
        if (!involved.empty()) involved += ", ";
        involved += j < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(j)]
                                                               : "column " + std::to_string(j + 1);
      }
    }
    throw DomainError("estimate_moments: sample covariance is singular; remove one of the linearly "
                      "dependent columns (" + involved + ")");
  }
  return out;
}

RealDataResult real_data_pipeline(const ReturnsTable& table, const RealDataOptions& options) {
  const std::size_t d = table.values.cols();
  if (d < 2) throw DomainError("real-data pipeline: need covariates and a target");
  const std::size_t N = d - 1;
  const std::size_t n_total = table.rows();
  if (n_total < d + 3) throw DomainError("real-data pipeline: too few rows");

  RealDataResult out;
  out.n_total = n_total;
  out.n_learning = n_total - 1;
  const std::vector<double>& all = table.values.data();
  SampleMatrix learning(out.n_learning, d,
                        std::vector<double>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(out.n_learning * d)));
  if (options.x) {
    out.x = *options.x;
  } else {
    const auto last = table.values.row(n_total - 1);
    out.x.assign(last.begin(), last.begin() + static_cast<std::ptrdiff_t>(N));
  }
  out.moments = estimate_moments(learning, table.names);
  const EllipticalModel joint(out.moments.mu, out.moments.sigma, GaussianFamily{});

  SequenceSchedule schedule;
  schedule.b = options.b;
  schedule.c = options.c;
  schedule.rho = options.rho;
  schedule.N = N;
  schedule.a = options.a.value_or(1.0);
  schedule.validate();
  out.step = extremal_step(learning, joint, out.x, schedule, options.kernel);
  out.a_auto = !options.a.has_value();
  if (out.a_auto) schedule.a = (1.0 - options.b) * out.step.est.eta_hat;
  schedule.gamma_ref = out.step.est.gamma_hat;
  schedule.validate();
  out.schedule = schedule;
  out.regime = schedule_regime(schedule);
  out.conditions = check_conditions(schedule);
  out.estimates = risk_step(out.step, schedule, out.regime, options.measures);
  return out;
}

}  // namespace ecrisk
