// Copyright 2026 The lrplab Authors.
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

#include "lrplab/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lrplab/error.hpp"

namespace lrplab {
namespace {

constexpr const char* kMagic = "lrplab-checkpoint";
constexpr int kVersion = 1;

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

void put_matrix(std::ostream& out, const char* name, const Eigen::MatrixXd& m) {
  out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ' ';
      out << hex(m(r, c));
    }
    out << '\n';
  }
}

void put_vector(std::ostream& out, const char* name, const Eigen::VectorXd& v) {
  put_matrix(out, name, Eigen::MatrixXd(v.transpose()));
}

const char* act_name(Activation a) { return a == Activation::kTanh ? "tanh" : "linear"; }

void put_dense(std::ostream& out, const DenseLayer& layer) {
  out << "dense " << act_name(layer.activation) << '\n';
  put_matrix(out, "weights", layer.weights);
  put_vector(out, "bias", layer.bias);
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw LoadError(LoadErrorKind::kParse, "truncated checkpoint");
    return w;
  }

  void expect(const std::string& w) {
    const std::string got = word();
    if (got != w) {
      throw LoadError(LoadErrorKind::kParse,
                      "checkpoint: expected '" + w + "', found '" + got + "'");
    }
  }

  long integer() {
    const std::string w = word();
    char* end = nullptr;
    const long v = std::strtol(w.c_str(), &end, 10);
    if (end == w.c_str() || *end != '\0') {
      throw LoadError(LoadErrorKind::kParse, "checkpoint: bad integer '" + w + "'");
    }
    return v;
  }

  double real() {
    const std::string w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end == w.c_str() || *end != '\0') {
      throw LoadError(LoadErrorKind::kParse, "checkpoint: bad number '" + w + "'");
    }
    return v;
  }

  Eigen::MatrixXd matrix(const std::string& name) {
    expect("tensor");
    expect(name);
    const long rows = integer();
    const long cols = integer();
    if (rows < 0 || cols < 0) throw LoadError(LoadErrorKind::kDimension, "negative tensor shape");
    Eigen::MatrixXd m(rows, cols);
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c) m(r, c) = real();
    return m;
  }

  Eigen::VectorXd vector(const std::string& name) {
    Eigen::MatrixXd m = matrix(name);
    if (m.rows() != 1) throw LoadError(LoadErrorKind::kDimension, name + " must be a row vector");
    return m.row(0).transpose();
  }

  Activation activation() {
    const std::string w = word();
    if (w == "tanh") return Activation::kTanh;
    if (w == "linear") return Activation::kLinear;
    throw LoadError(LoadErrorKind::kParse, "checkpoint: unknown activation '" + w + "'");
  }

  DenseLayer dense() {
    expect("dense");
    DenseLayer layer;
    layer.activation = activation();
    layer.weights = matrix("weights");
    layer.bias = vector("bias");
    return layer;
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_checkpoint(std::ostream& out, const Model& model) {
  out << kMagic << ' ' << kVersion << '\n';
  std::visit(
      [&out](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MlpModel>) {
          out << "kind mlp\nlayers " << m.layers.size() << '\n';
          for (const auto& layer : m.layers) put_dense(out, layer);
        } else if constexpr (std::is_same_v<T, ConvModel>) {
          out << "kind cnn\ninput " << m.input.channels << ' ' << m.input.rows << ' '
              << m.input.cols << "\nstages " << m.stages.size() << '\n';
          for (const auto& s : m.stages) {
            out << "conv " << act_name(s.activation) << ' ' << s.kernel << ' '
                << s.stride << ' ' << s.in_channels << ' ' << s.out_channels << '\n';
            put_matrix(out, "kernels", s.kernels);
            put_vector(out, "bias", s.bias);
          }
          out << "head " << m.head.size() << '\n';
          for (const auto& layer : m.head) put_dense(out, layer);
        } else {
          const Reservoir& r = *m.reservoir;
          out << "kind esn\nalpha " << hex(r.alpha) << '\n';
          put_matrix(out, "w_in", r.w_in);
          put_vector(out, "b_in", r.b_in);
          out << "sparse w_res " << r.w_res.rows() << ' ' << r.w_res.cols() << ' '
              << r.w_res.nonZeros() << '\n';
          for (int k = 0; k < r.w_res.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(r.w_res, k);
                 it; ++it) {
              out << it.row() << ' ' << it.col() << ' ' << hex(it.value()) << '\n';
            }
          }
          put_vector(out, "b_res", r.b_res);
          put_vector(out, "readout", m.readout.weights);
          out << "readout_bias " << hex(m.readout.bias) << '\n';
        }
      },
      model);
  out << "end\n";
}

Model read_checkpoint(std::istream& in) {
  Reader rd(in);
  rd.expect(kMagic);
  const long version = rd.integer();
  if (version != kVersion) {
    throw LoadError(LoadErrorKind::kParse,
                    "unsupported checkpoint version " + std::to_string(version));
  }
  rd.expect("kind");
  const std::string kind = rd.word();
  Model result;
  if (kind == "mlp") {
    rd.expect("layers");
    const long n = rd.integer();
    MlpModel m;
    for (long i = 0; i < n; ++i) m.layers.push_back(rd.dense());
    m.validate();
    result = std::move(m);
  } else if (kind == "cnn") {
    ConvModel m;
    rd.expect("input");
    m.input.channels = static_cast<int>(rd.integer());
    m.input.rows = static_cast<int>(rd.integer());
    m.input.cols = static_cast<int>(rd.integer());
    rd.expect("stages");
    const long n = rd.integer();
    for (long i = 0; i < n; ++i) {
      rd.expect("conv");
      ConvStage s;
      s.activation = rd.activation();
      s.kernel = static_cast<int>(rd.integer());
      s.stride = static_cast<int>(rd.integer());
      s.in_channels = static_cast<int>(rd.integer());
      s.out_channels = static_cast<int>(rd.integer());
      s.kernels = rd.matrix("kernels");
      s.bias = rd.vector("bias");
      m.stages.push_back(std::move(s));
    }
    rd.expect("head");
    const long h = rd.integer();
    for (long i = 0; i < h; ++i) m.head.push_back(rd.dense());
    m.validate();
    result = std::move(m);
  } else if (kind == "esn") {
    Reservoir r;
    rd.expect("alpha");
    r.alpha = rd.real();
    r.w_in = rd.matrix("w_in");
    r.b_in = rd.vector("b_in");
    rd.expect("sparse");
    rd.expect("w_res");
    const long rows = rd.integer();
    const long cols = rd.integer();
    const long nnz = rd.integer();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nnz));
    for (long k = 0; k < nnz; ++k) {
      const long i = rd.integer();
      const long j = rd.integer();
      if (i < 0 || i >= rows || j < 0 || j >= cols) {
        throw LoadError(LoadErrorKind::kDimension, "w_res index out of range");
      }
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), rd.real());
    }
    r.w_res.resize(rows, cols);
    r.w_res.setFromTriplets(triplets.begin(), triplets.end());
    r.w_res.makeCompressed();
    r.b_res = rd.vector("b_res");
    EsnModel m;
    m.readout.weights = rd.vector("readout");
    rd.expect("readout_bias");
    m.readout.bias = rd.real();
    if (r.w_res.rows() != r.w_in.rows() || r.w_res.cols() != r.w_in.rows() ||
        r.b_in.size() != r.w_in.rows() || r.b_res.size() != r.w_in.rows() ||
        m.readout.weights.size() != r.w_in.rows()) {
      throw LoadError(LoadErrorKind::kDimension, "inconsistent ESN tensor shapes");
    }
    m.reservoir = std::make_shared<const Reservoir>(std::move(r));
    result = std::move(m);
  } else {
    throw LoadError(LoadErrorKind::kParse, "unknown model kind '" + kind + "'");
  }
  rd.expect("end");
  return result;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_checkpoint(out, model);
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(LoadErrorKind::kMissingFile, "cannot open '" + path.string() + "'");
  try {
    return read_checkpoint(in);
  } catch (const ShapeError& e) {
    throw LoadError(LoadErrorKind::kDimension, e.what());
  }
}

}  // namespace lrplab
