#include "pcl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "pcl/errors.hpp"

namespace pcl {

namespace {

using Eigen::ArrayXXd;
using Eigen::MatrixXd;

struct LayerView {
  Eigen::Map<const MatrixXd> w;
  Eigen::Map<const Eigen::VectorXd> b;
};

LayerView layer_view(const MlpParams& params, std::size_t l, std::size_t offset) {
  const auto in = static_cast<Eigen::Index>(params.arch.widths[l]);
  const auto out = static_cast<Eigen::Index>(params.arch.widths[l + 1]);
  return {Eigen::Map<const MatrixXd>(params.flat.data() + offset, out, in),
          Eigen::Map<const Eigen::VectorXd>(params.flat.data() + offset + out * in, out)};
}

std::vector<std::size_t> layer_offsets(const MlpArchitecture& arch) {
  std::vector<std::size_t> offsets(arch.n_layers());
  std::size_t offset = 0;
  for (std::size_t l = 0; l < arch.n_layers(); ++l) {
    offsets[l] = offset;
    offset += arch.widths[l] * arch.widths[l + 1] + arch.widths[l + 1];
  }
  return offsets;
}

void check_params(const MlpParams& params) {
  if (static_cast<std::size_t>(params.flat.size()) != params.arch.parameter_count())
    throw InvalidArgument("MLP parameter vector does not match its architecture");
}

constexpr char kMagic[4] = {'P', 'C', 'L', '1'};

}  // namespace

std::size_t MlpArchitecture::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l)
    count += widths[l] * widths[l + 1] + widths[l + 1];
  return count;
}

void MlpArchitecture::validate() const {
  if (widths.size() < 2) throw InvalidArgument("MLP needs at least an input and an output layer");
  if (widths.front() != 2 || widths.back() != 1)
    throw InvalidArgument("MLP maps (x, t) to a scalar: widths must start at 2 and end at 1");
  for (auto w : widths)
    if (w < 1) throw InvalidArgument("MLP layer widths must be >= 1");
  if (!(scaling.x_scale != 0.0 && scaling.t_scale != 0.0))
    throw InvalidArgument("input scaling factors must be nonzero");
}

MlpParams init_params(const MlpArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  MlpParams p{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arch.parameter_count())), arch,
              seed};
  std::mt19937_64 rng(seed);
  const auto offsets = layer_offsets(arch);
  for (std::size_t l = 0; l < arch.n_layers(); ++l) {
    const auto fan_in = arch.widths[l];
    const auto fan_out = arch.widths[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t k = 0; k < fan_in * fan_out; ++k)
      p.flat[static_cast<Eigen::Index>(offsets[l] + k)] = dist(rng);
  }
  return p;
}

MlpParams zero_params(const MlpArchitecture& arch) {
  arch.validate();
  return MlpParams{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arch.parameter_count())), arch,
                   0};
}

void JetBatch::resize_zero(Eigen::Index n) {
  value.setZero(n);
  d_t.setZero(n);
  d_x.setZero(n);
  d_xx.setZero(n);
}

void jet_batch(const MlpParams& params, std::span<const double> xs, std::span<const double> ts,
               JetOrder order, JetBatch& out, MlpTape* tape) {
  check_params(params);
  if (xs.size() != ts.size()) throw InvalidArgument("jet_batch: xs and ts differ in length");
  const auto np = static_cast<Eigen::Index>(xs.size());
  const bool full = order == JetOrder::Full;
  const auto& sc = params.arch.scaling;
  const std::size_t n_layers = params.arch.n_layers();
  const auto offsets = layer_offsets(params.arch);

  MatrixXd a(2, np), a_t, a_x, a_xx;
  for (Eigen::Index k = 0; k < np; ++k) {
    a(0, k) = (xs[static_cast<std::size_t>(k)] - sc.x_shift) * sc.x_scale;
    a(1, k) = (ts[static_cast<std::size_t>(k)] - sc.t_shift) * sc.t_scale;
  }
  if (full) {
    a_t = MatrixXd::Zero(2, np);
    a_x = MatrixXd::Zero(2, np);
    a_xx = MatrixXd::Zero(2, np);
    a_t.row(1).setConstant(sc.t_scale);
    a_x.row(0).setConstant(sc.x_scale);
  }
  if (tape) {
    tape->layers.assign(n_layers, {});
    tape->order = order;
    tape->points = np;
  }

  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto layer = layer_view(params, l, offsets[l]);
    MatrixXd z = layer.w * a;
    z.colwise() += layer.b;
    MatrixXd z_t, z_x, z_xx;
    if (full) {
      z_t.noalias() = layer.w * a_t;
      z_x.noalias() = layer.w * a_x;
      z_xx.noalias() = layer.w * a_xx;
    }
    if (l + 1 == n_layers) {  // linear output layer
      if (tape) {
        auto& rec = tape->layers[l];
        rec.a = std::move(a);
        rec.a_t = std::move(a_t);
        rec.a_x = std::move(a_x);
        rec.a_xx = std::move(a_xx);
      }
      out.value = z.row(0).transpose().array();
      if (full) {
        out.d_t = z_t.row(0).transpose().array();
        out.d_x = z_x.row(0).transpose().array();
        out.d_xx = z_xx.row(0).transpose().array();
      } else {
        out.d_t.setZero(np);
        out.d_x.setZero(np);
        out.d_xx.setZero(np);
      }
      return;
    }

    MatrixXd h = z.array().tanh().matrix();
    MatrixXd next_t, next_x, next_xx;
    if (full) {
      const ArrayXXd s = 1.0 - h.array().square();
      const ArrayXXd sp = -2.0 * h.array() * s;
      next_t = (s * z_t.array()).matrix();
      next_x = (s * z_x.array()).matrix();
      next_xx = (s * z_xx.array() + sp * z_x.array().square()).matrix();
    }
    if (tape) {
      auto& rec = tape->layers[l];
      rec.a = std::move(a);
      rec.a_t = std::move(a_t);
      rec.a_x = std::move(a_x);
      rec.a_xx = std::move(a_xx);
      rec.h = h;
      rec.z_t = std::move(z_t);
      rec.z_x = std::move(z_x);
      rec.z_xx = std::move(z_xx);
    }
    a = std::move(h);
    a_t = std::move(next_t);
    a_x = std::move(next_x);
    a_xx = std::move(next_xx);
  }
}

void mlp_backward(const MlpParams& params, const MlpTape& tape, const JetBatch& seeds,
                  Eigen::Ref<Eigen::VectorXd> grad) {
  check_params(params);
  if (grad.size() != params.flat.size()) throw InvalidArgument("mlp_backward: gradient size");
  const std::size_t n_layers = params.arch.n_layers();
  if (tape.layers.size() != n_layers) throw InvalidArgument("mlp_backward: tape/arch mismatch");
  const bool full = tape.order == JetOrder::Full;
  const auto np = tape.points;
  const auto offsets = layer_offsets(params.arch);

  // Gradients with respect to the current layer's output channels.
  MatrixXd g = seeds.value.matrix().transpose();
  MatrixXd g_t, g_x, g_xx;
  if (full) {
    g_t = seeds.d_t.matrix().transpose();
    g_x = seeds.d_x.matrix().transpose();
    g_xx = seeds.d_xx.matrix().transpose();
  }

  for (std::size_t l = n_layers; l-- > 0;) {
    const auto& rec = tape.layers[l];
    const auto layer = layer_view(params, l, offsets[l]);
    const auto in = layer.w.cols();
    const auto out = layer.w.rows();

    MatrixXd gz, gz_t, gz_x, gz_xx;
    if (l + 1 == n_layers) {
      gz = std::move(g);
      gz_t = std::move(g_t);
      gz_x = std::move(g_x);
      gz_xx = std::move(g_xx);
    } else {
      const ArrayXXd h = rec.h.array();
      const ArrayXXd s = 1.0 - h.square();
      if (!full) {
        gz = (g.array() * s).matrix();
      } else {
        const ArrayXXd sp = -2.0 * h * s;
        const ArrayXXd spp = -2.0 * s * (s - 2.0 * h.square());
        const ArrayXXd zt = rec.z_t.array();
        const ArrayXXd zx = rec.z_x.array();
        const ArrayXXd zxx = rec.z_xx.array();
        const ArrayXXd gs = g_t.array() * zt + g_x.array() * zx + g_xx.array() * zxx;
        gz = (g.array() * s + gs * sp + g_xx.array() * zx.square() * spp).matrix();
        gz_t = (g_t.array() * s).matrix();
        gz_x = (g_x.array() * s + 2.0 * g_xx.array() * sp * zx).matrix();
        gz_xx = (g_xx.array() * s).matrix();
      }
    }

    Eigen::Map<MatrixXd> dw(grad.data() + offsets[l], out, in);
    Eigen::Map<Eigen::VectorXd> db(grad.data() + offsets[l] + out * in, out);
    dw.noalias() += gz * rec.a.transpose();
    if (full) {
      dw.noalias() += gz_t * rec.a_t.transpose();
      dw.noalias() += gz_x * rec.a_x.transpose();
      dw.noalias() += gz_xx * rec.a_xx.transpose();
    }
    db += gz.rowwise().sum();

    if (l > 0) {
      g.noalias() = layer.w.transpose() * gz;
      if (full) {
        g_t.noalias() = layer.w.transpose() * gz_t;
        g_x.noalias() = layer.w.transpose() * gz_x;
        g_xx.noalias() = layer.w.transpose() * gz_xx;
      }
    }
  }
  (void)np;
}

FieldJet jet(const MlpParams& params, double x, double t) {
  JetBatch b;
  const double xs[1] = {x};
  const double ts[1] = {t};
  jet_batch(params, xs, ts, JetOrder::Full, b);
  return b.at(0);
}

double forward(const MlpParams& params, double x, double t) {
  JetBatch b;
  const double xs[1] = {x};
  const double ts[1] = {t};
  jet_batch(params, xs, ts, JetOrder::Value, b);
  return b.value[0];
}

std::vector<double> accumulate_point_loss(std::span<const MlpParams* const> nets,
                                          std::span<const JetOrder> orders,
                                          const PointSet& points, std::size_t n_partials,
                                          const PointLoss& loss,
                                          std::vector<Eigen::VectorXd>* grads,
                                          const Parallelism& par) {
  if (nets.size() != orders.size()) throw InvalidArgument("accumulate_point_loss: orders");
  if (points.xs.size() != points.ts.size()) throw InvalidArgument("accumulate_point_loss: points");
  const std::size_t n_points = points.size();
  const std::size_t n_chunks = (n_points + kChunkPoints - 1) / kChunkPoints;
  const std::size_t n_nets = nets.size();

  std::vector<std::vector<double>> chunk_partials(n_chunks, std::vector<double>(n_partials, 0.0));
  std::vector<std::vector<Eigen::VectorXd>> chunk_grads(grads ? n_chunks : 0);

  for_each_chunk(n_chunks, par, [&](std::size_t c) {
    const std::size_t first = c * kChunkPoints;
    const std::size_t count = std::min(kChunkPoints, n_points - first);
    const std::span<const double> xs(points.xs.data() + first, count);
    const std::span<const double> ts(points.ts.data() + first, count);
    std::vector<JetBatch> jets(n_nets), seeds(n_nets);
    std::vector<MlpTape> tapes(grads ? n_nets : 0);
    for (std::size_t k = 0; k < n_nets; ++k) {
      jet_batch(*nets[k], xs, ts, orders[k], jets[k], grads ? &tapes[k] : nullptr);
      seeds[k].resize_zero(static_cast<Eigen::Index>(count));
    }
    loss(first, jets, seeds, chunk_partials[c]);
    if (grads) {
      auto& local = chunk_grads[c];
      local.resize(n_nets);
      for (std::size_t k = 0; k < n_nets; ++k) {
        local[k] = Eigen::VectorXd::Zero(nets[k]->flat.size());
        mlp_backward(*nets[k], tapes[k], seeds[k], local[k]);
      }
    }
  });

  std::vector<double> totals(n_partials, 0.0);
  for (const auto& p : chunk_partials)
    for (std::size_t j = 0; j < n_partials; ++j) totals[j] += p[j];
  if (grads) {
    grads->resize(n_nets);
    for (std::size_t k = 0; k < n_nets; ++k) {
      if ((*grads)[k].size() != nets[k]->flat.size())
        (*grads)[k] = Eigen::VectorXd::Zero(nets[k]->flat.size());
      for (const auto& cg : chunk_grads) (*grads)[k] += cg[k];
    }
  }
  return totals;
}

void write_params(const std::filesystem::path& path, const MlpParams& params) {
  check_params(params);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  auto put = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
  out.write(kMagic, 4);
  put(1);
  put(static_cast<std::uint64_t>(params.flat.size()));
  put(params.arch.widths.size());
  for (auto w : params.arch.widths) put(w);
  out.write(reinterpret_cast<const char*>(params.flat.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(params.flat.size())));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

MlpParams read_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("'" + path.string() + "' is not a PCL1 file");
  auto get = [&] {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw IoError("truncated header in '" + path.string() + "'");
    return v;
  };
  if (get() != 1) throw IoError("parameter file must be rank 1");
  const auto length = get();
  const auto n_widths = get();
  if (n_widths < 2 || n_widths > 64) throw IoError("implausible layer count in parameter file");
  MlpParams p;
  p.arch.widths.clear();
  for (std::uint64_t k = 0; k < n_widths; ++k) p.arch.widths.push_back(get());
  if (p.arch.parameter_count() != length)
    throw IoError("parameter count does not match the stored architecture");
  p.flat.resize(static_cast<Eigen::Index>(length));
  in.read(reinterpret_cast<char*>(p.flat.data()),
          static_cast<std::streamsize>(sizeof(double) * length));
  if (!in) throw IoError("truncated data in '" + path.string() + "'");
  return p;
}

}  // namespace pcl
