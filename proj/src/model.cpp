#include "tdmix/model.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "tdmix/error.hpp"
#include "tdmix/math.hpp"
#include "tdmix/rng.hpp"

namespace tdmix {

namespace {

constexpr const char* kCheckpointMagic = "tdmix.ckpt.v1";

void fill_uniform(Matrix& m, double scale, Rng& rng) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      m(i, j) = scale * (2.0 * rng.next_unit() - 1.0);
    }
  }
}

void fill_uniform(Vector& v, double scale, Rng& rng) {
  for (Index i = 0; i < v.size(); ++i) {
    v[i] = scale * (2.0 * rng.next_unit() - 1.0);
  }
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix(std::ostringstream& out, const char* name, const Matrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_value(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix(std::istream& in, const std::string& expected_name) {
  std::string name;
  Index rows = -1;
  Index cols = -1;
  if (!(in >> name >> rows >> cols) || name != expected_name || rows < 0 || cols < 0) {
    throw DataError("checkpoint: expected tensor " + expected_name);
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (!(in >> m(i, j))) {
        throw DataError("checkpoint: truncated tensor " + expected_name);
      }
    }
  }
  return m;
}

}  // namespace

bool ModelParams::all_finite() const {
  return w_hidden.allFinite() && b_hidden.allFinite() && w_out.allFinite() &&
         b_out.allFinite();
}

ModelParams init_params(int input_dim, int hidden_width, int num_outputs,
                        std::uint64_t seed) {
  if (input_dim < 1 || num_outputs < 2 || hidden_width < 0) {
    throw ConfigError("init_params: bad shape (d=" + std::to_string(input_dim) +
                      ", h=" + std::to_string(hidden_width) +
                      ", c=" + std::to_string(num_outputs) + ")");
  }
  Rng rng(seed);
  ModelParams params;
  if (hidden_width > 0) {
    params.w_hidden.resize(hidden_width, input_dim);
    params.b_hidden.resize(hidden_width);
    fill_uniform(params.w_hidden, 1.0 / std::sqrt(input_dim), rng);
    fill_uniform(params.b_hidden, 1.0 / std::sqrt(input_dim), rng);
    params.w_out.resize(num_outputs, hidden_width);
    params.b_out.resize(num_outputs);
    fill_uniform(params.w_out, 1.0 / std::sqrt(hidden_width), rng);
    fill_uniform(params.b_out, 1.0 / std::sqrt(hidden_width), rng);
  } else {
    params.w_hidden.resize(0, 0);
    params.b_hidden.resize(0);
    params.w_out.resize(num_outputs, input_dim);
    params.b_out.resize(num_outputs);
    fill_uniform(params.w_out, 1.0 / std::sqrt(input_dim), rng);
    fill_uniform(params.b_out, 1.0 / std::sqrt(input_dim), rng);
  }
  return params;
}

ForwardResult forward(const ModelParams& params, const Vector& features) {
  if (features.size() != params.input_dim()) {
    throw DataError("forward: feature arity " + std::to_string(features.size()) +
                    " does not match model input " +
                    std::to_string(params.input_dim()));
  }
  if (!features.allFinite()) throw DataError("forward: non-finite input");
  ForwardResult result;
  if (params.hidden_width() > 0) {
    result.hidden = (params.w_hidden * features + params.b_hidden).array().tanh();
    result.logits = params.w_out * result.hidden + params.b_out;
  } else {
    result.logits = params.w_out * features + params.b_out;
  }
  result.probabilities = softmax(result.logits);
  return result;
}

Matrix forward_logits(const ModelParams& params, const Matrix& features) {
  if (features.rows() != params.input_dim()) {
    throw DataError("forward_logits: feature arity mismatch");
  }
  if (params.hidden_width() > 0) {
    Matrix hidden =
        ((params.w_hidden * features).colwise() + params.b_hidden).array().tanh();
    return (params.w_out * hidden).colwise() + params.b_out;
  }
  return (params.w_out * features).colwise() + params.b_out;
}

double soft_cross_entropy(const Vector& probabilities, const Vector& soft_label) {
  if (probabilities.size() != soft_label.size()) {
    throw DataError("soft_cross_entropy: arity mismatch");
  }
  double loss = 0.0;
  for (Index k = 0; k < probabilities.size(); ++k) {
    loss -= soft_label[k] * std::log(std::max(probabilities[k], 1e-12));
  }
  return loss;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     std::uint64_t seed) {
  std::ostringstream out;
  out << kCheckpointMagic << '\n';
  out << "input_dim " << params.input_dim() << '\n';
  out << "hidden_width " << params.hidden_width() << '\n';
  out << "num_outputs " << params.num_outputs() << '\n';
  out << "seed " << seed << '\n';
  write_matrix(out, "w_hidden", params.w_hidden);
  write_matrix(out, "b_hidden", params.b_hidden);
  write_matrix(out, "w_out", params.w_out);
  write_matrix(out, "b_out", params.b_out);

  namespace fs = std::filesystem;
  const fs::path parent = path.parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw DataError("cannot create directory " + parent.string());
  }
  const fs::path temp = path.string() + ".tmp";
  {
    std::ofstream file(temp, std::ios::binary | std::ios::trunc);
    if (!file) throw DataError("cannot write checkpoint: " + temp.string());
    const std::string content = out.str();
    file.write(content.data(), static_cast<std::streamsize>(content.size()));
    file.flush();
    if (!file) throw DataError("failed writing " + temp.string());
  }
  std::error_code ec;
  fs::rename(temp, path, ec);
  if (ec) {
    fs::remove(temp, ec);
    throw DataError("cannot move " + temp.string() + " into place");
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open checkpoint: " + path.string());
  std::string magic;
  std::getline(file, magic);
  if (magic != kCheckpointMagic) {
    throw DataError("checkpoint " + path.string() + ": unknown format version");
  }
  auto read_header = [&](const std::string& key) -> std::uint64_t {
    std::string name;
    std::uint64_t value = 0;
    if (!(file >> name >> value) || name != key) {
      throw DataError("checkpoint: expected header field " + key);
    }
    return value;
  };
  const auto input_dim = static_cast<int>(read_header("input_dim"));
  const auto hidden_width = static_cast<int>(read_header("hidden_width"));
  const auto num_outputs = static_cast<int>(read_header("num_outputs"));

  Checkpoint ckpt;
  ckpt.seed = read_header("seed");
  ckpt.params.w_hidden = read_matrix(file, "w_hidden");
  ckpt.params.b_hidden = read_matrix(file, "b_hidden").col(0);
  ckpt.params.w_out = read_matrix(file, "w_out");
  ckpt.params.b_out = read_matrix(file, "b_out").col(0);

  if (ckpt.params.input_dim() != input_dim ||
      ckpt.params.hidden_width() != hidden_width ||
      ckpt.params.num_outputs() != num_outputs) {
    throw DataError("checkpoint " + path.string() + ": header/tensor shape mismatch");
  }
  return ckpt;
}

}  // namespace tdmix
