// SPDX-License-Identifier: Apache-2.0
//
// pilotnet - learned pilots and channel estimation for wideband massive MIMO
// Copyright (C) 2026 The pilotnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "pilotnet/network.hpp"

#include <algorithm>
#include <numeric>

namespace pilotnet
{

void NetworkHyper::validate() const
{
    if (n_h < 1 || n_v < 1 || m < 1 || n_re < 0 || n_re > 16)
        throw ConfigError("NetworkHyper: need n_h, n_v, m >= 1 and 0 <= n_re <= 16");
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
        throw ConfigError("NetworkHyper: leaky_slope must lie in (0, 1)");
    if (!(bn_epsilon > 0.0) || !(bn_momentum >= 0.0 && bn_momentum < 1.0))
        throw ConfigError("NetworkHyper: bn_epsilon must be > 0 and bn_momentum in [0, 1)");
}

void TrainConfig::validate() const
{
    if (!(learning_rate > 0.0) || batch_size < 1 || epochs < 1 || max_steps < 0)
        throw ConfigError("TrainConfig: need learning_rate > 0, batch_size >= 1, epochs >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(adam_epsilon > 0.0))
        throw ConfigError("TrainConfig: Adam betas must be in [0, 1) and epsilon > 0");
}

std::uint64_t MacCounter::conv_total() const
{
    return std::accumulate(conv.begin(), conv.end(), std::uint64_t(0));
}

template <typename Scalar>
template <typename To>
ModelParams<To> ModelParams<Scalar>::cast() const
{
    ModelParams<To> out;
    out.hyper = hyper;
    out.x_tilde = x_tilde.template cast<To>();
    out.x_prime = x_prime.template cast<To>();
    out.output_conv = output_conv.template cast<To>();
    out.units.reserve(units.size());
    for (const auto &u : units)
        out.units.push_back({u.kernels.template cast<To>(), u.gamma.template cast<To>(), u.beta.template cast<To>(),
                             u.running_mean.template cast<To>(), u.running_var.template cast<To>()});
    return out;
}

template <typename Scalar>
ModelParams<Scalar> ModelParams<Scalar>::zeros(const NetworkHyper &hyper)
{
    hyper.validate();
    ModelParams p;
    p.hyper = hyper;
    const Index n = hyper.n_bs();
    p.x_tilde = Matrix<Scalar>::Zero(n, hyper.m);
    p.x_prime = Matrix<Scalar>::Zero(2 * hyper.m, 2 * n);
    for (Index u = 0; u < hyper.n_re; ++u)
    {
        const Index c_in = hyper.unit_in(u);
        const Index c_out = hyper.unit_out(u);
        p.units.push_back({Matrix<Scalar>::Zero(9 * c_in, c_out), Matrix<Scalar>::Ones(c_out, 1),
                           Matrix<Scalar>::Zero(c_out, 1), Vector<Scalar>::Zero(c_out), Vector<Scalar>::Ones(c_out)});
    }
    p.output_conv = Matrix<Scalar>::Zero(9 * hyper.last_channels(), 2);
    return p;
}

template <typename Scalar>
ModelGrads<Scalar> ModelGrads<Scalar>::zeros_like(const ModelParams<Scalar> &params)
{
    ModelGrads g;
    g.x_tilde = Matrix<Scalar>::Zero(params.x_tilde.rows(), params.x_tilde.cols());
    g.x_prime = Matrix<Scalar>::Zero(params.x_prime.rows(), params.x_prime.cols());
    for (const auto &u : params.units)
        g.units.push_back({Matrix<Scalar>::Zero(u.kernels.rows(), u.kernels.cols()),
                           Matrix<Scalar>::Zero(u.gamma.rows(), 1), Matrix<Scalar>::Zero(u.beta.rows(), 1)});
    g.output_conv = Matrix<Scalar>::Zero(params.output_conv.rows(), params.output_conv.cols());
    return g;
}

// ---- layers ------------------------------------------------------------------

template <typename Scalar>
RowMatrix<Scalar> im2col(const RowMatrix<Scalar> &x, Index n_h, Index n_v)
{
    const Index pixels = n_h * n_v;
    if (pixels < 1 || x.rows() % pixels != 0)
        throw ShapeError("im2col: row count must be a multiple of n_h * n_v");
    const Index batch = x.rows() / pixels;
    const Index c = x.cols();
    RowMatrix<Scalar> cols = RowMatrix<Scalar>::Zero(x.rows(), 9 * c);
    for (Index b = 0; b < batch; ++b)
        for (Index h = 0; h < n_h; ++h)
            for (Index v = 0; v < n_v; ++v)
            {
                const Index row = b * pixels + h * n_v + v;
                for (Index kh = 0; kh < 3; ++kh)
                {
                    const Index sh = h + kh - 1;
                    if (sh < 0 || sh >= n_h)
                        continue;
                    for (Index kw = 0; kw < 3; ++kw)
                    {
                        const Index sv = v + kw - 1;
                        if (sv < 0 || sv >= n_v)
                            continue;
                        cols.row(row).segment((kh * 3 + kw) * c, c) = x.row(b * pixels + sh * n_v + sv);
                    }
                }
            }
    return cols;
}

template <typename Scalar>
RowMatrix<Scalar> col2im(const RowMatrix<Scalar> &cols, Index n_h, Index n_v)
{
    const Index pixels = n_h * n_v;
    if (pixels < 1 || cols.rows() % pixels != 0 || cols.cols() % 9 != 0)
        throw ShapeError("col2im: shape does not match a 3x3 expansion");
    const Index batch = cols.rows() / pixels;
    const Index c = cols.cols() / 9;
    RowMatrix<Scalar> x = RowMatrix<Scalar>::Zero(cols.rows(), c);
    for (Index b = 0; b < batch; ++b)
        for (Index h = 0; h < n_h; ++h)
            for (Index v = 0; v < n_v; ++v)
            {
                const Index row = b * pixels + h * n_v + v;
                for (Index kh = 0; kh < 3; ++kh)
                {
                    const Index sh = h + kh - 1;
                    if (sh < 0 || sh >= n_h)
                        continue;
                    for (Index kw = 0; kw < 3; ++kw)
                    {
                        const Index sv = v + kw - 1;
                        if (sv < 0 || sv >= n_v)
                            continue;
                        x.row(b * pixels + sh * n_v + sv) += cols.row(row).segment((kh * 3 + kw) * c, c);
                    }
                }
            }
    return x;
}

template <typename Scalar>
RowMatrix<Scalar> conv2d_forward(const RowMatrix<Scalar> &x, const Matrix<Scalar> &kernels, Index n_h, Index n_v)
{
    if (kernels.rows() != 9 * x.cols())
        throw ShapeError("conv2d_forward: kernel rows must equal 9 * input channels");
    RowMatrix<Scalar> out(x.rows(), kernels.cols());
    out.noalias() = im2col(x, n_h, n_v) * kernels;
    return out;
}

template <typename Scalar>
RealTensor3<Scalar> conv2d_forward(const RealTensor3<Scalar> &x, const Matrix<Scalar> &kernels)
{
    const Index c_in = Index(x.dims[0]);
    const Index n_h = Index(x.dims[1]);
    const Index n_v = Index(x.dims[2]);
    const Index pixels = n_h * n_v;
    RowMatrix<Scalar> maps(pixels, c_in);
    for (Index c = 0; c < c_in; ++c)
        for (Index p = 0; p < pixels; ++p)
            maps(p, c) = x.data[std::size_t(c * pixels + p)];
    const RowMatrix<Scalar> y = conv2d_forward(maps, kernels, n_h, n_v);
    RealTensor3<Scalar> out(std::size_t(y.cols()), x.dims[1], x.dims[2]);
    for (Index c = 0; c < y.cols(); ++c)
        for (Index p = 0; p < pixels; ++p)
            out.data[std::size_t(c * pixels + p)] = y(p, c);
    return out;
}

template <typename Scalar>
ConvGrads<Scalar> conv2d_backward(const RowMatrix<Scalar> &cols, const Matrix<Scalar> &kernels,
                                  const RowMatrix<Scalar> &d_out, Index n_h, Index n_v)
{
    if (d_out.rows() != cols.rows() || d_out.cols() != kernels.cols() || cols.cols() != kernels.rows())
        throw ShapeError("conv2d_backward: inconsistent shapes");
    ConvGrads<Scalar> g;
    g.d_kernels.noalias() = cols.transpose() * d_out;
    RowMatrix<Scalar> d_cols(cols.rows(), cols.cols());
    d_cols.noalias() = d_out * kernels.transpose();
    g.d_input = col2im(d_cols, n_h, n_v);
    return g;
}

namespace
{

template <typename Scalar>
RowMatrix<Scalar> bn_forward_core(const RowMatrix<Scalar> &x, const Matrix<Scalar> &gamma, const Matrix<Scalar> &beta,
                                  const Vector<Scalar> &running_mean, const Vector<Scalar> &running_var, BnMode mode,
                                  double epsilon, BatchNormCache<Scalar> *cache, Vector<Scalar> *batch_mean,
                                  Vector<Scalar> *batch_var)
{
    const Index c = x.cols();
    if (gamma.rows() != c || beta.rows() != c || running_mean.size() != c || running_var.size() != c)
        throw ShapeError("batchnorm: parameter length must equal the channel count");

    Vector<Scalar> mean, var;
    if (mode == BnMode::train)
    {
        if (x.rows() < 2)
            throw ShapeError("batchnorm: train mode needs at least two rows per channel");
        mean = x.colwise().mean().transpose();
        var = (x.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
    }
    else
    {
        mean = running_mean;
        var = running_var;
    }
    const Vector<Scalar> inv_std = (var.array() + Scalar(epsilon)).rsqrt().matrix();
    RowMatrix<Scalar> x_hat = ((x.rowwise() - mean.transpose()).array().rowwise() * inv_std.transpose().array()).matrix();
    RowMatrix<Scalar> y = ((x_hat.array().rowwise() * gamma.col(0).transpose().array()).rowwise() +
                           beta.col(0).transpose().array())
                              .matrix();
    if (batch_mean)
        *batch_mean = mean;
    if (batch_var)
        *batch_var = var;
    if (cache)
    {
        cache->mode = mode;
        cache->x_hat = std::move(x_hat);
        cache->inv_std = inv_std;
    }
    return y;
}

} // namespace

template <typename Scalar>
RowMatrix<Scalar> batchnorm_forward(const RowMatrix<Scalar> &x, const Matrix<Scalar> &gamma,
                                    const Matrix<Scalar> &beta, Vector<Scalar> &running_mean,
                                    Vector<Scalar> &running_var, BnMode mode, double epsilon, double momentum,
                                    BatchNormCache<Scalar> *cache)
{
    Vector<Scalar> mean, var;
    RowMatrix<Scalar> y =
        bn_forward_core(x, gamma, beta, running_mean, running_var, mode, epsilon, cache, &mean, &var);
    if (mode == BnMode::train)
    {
        const Scalar mom = Scalar(momentum);
        running_mean = mom * running_mean + (Scalar(1) - mom) * mean;
        running_var = mom * running_var + (Scalar(1) - mom) * var;
    }
    return y;
}

template <typename Scalar>
BatchNormGrads<Scalar> batchnorm_backward(const RowMatrix<Scalar> &d_out, const BatchNormCache<Scalar> &cache,
                                          const Matrix<Scalar> &gamma)
{
    const auto &x_hat = cache.x_hat;
    if (d_out.rows() != x_hat.rows() || d_out.cols() != x_hat.cols() || gamma.rows() != x_hat.cols())
        throw ShapeError("batchnorm_backward: inconsistent shapes");
    BatchNormGrads<Scalar> g;
    g.d_beta = d_out.colwise().sum().transpose();
    g.d_gamma = (d_out.array() * x_hat.array()).colwise().sum().transpose().matrix();

    const auto scale = (gamma.col(0).array() * cache.inv_std.array()).eval();
    if (cache.mode == BnMode::infer)
    {
        g.d_input = (d_out.array().rowwise() * scale.transpose()).matrix();
        return g;
    }
    // dx = gamma inv_std / N (N dy - sum(dy) - x_hat sum(dy x_hat))
    const Scalar n = Scalar(d_out.rows());
    const auto sum_dy = g.d_beta.col(0).transpose().array().eval();
    const auto sum_dy_xhat = g.d_gamma.col(0).transpose().array().eval();
    g.d_input = (((n * d_out.array()).rowwise() - sum_dy - x_hat.array().rowwise() * sum_dy_xhat).rowwise() *
                 (scale.transpose() / n))
                    .matrix();
    return g;
}

template <typename Scalar>
RowMatrix<Scalar> coarse_estimate(const RowMatrix<Scalar> &y_flat, const Matrix<Scalar> &x_prime)
{
    if (y_flat.cols() != x_prime.rows())
        throw ShapeError("coarse_estimate: measurement length must equal rows(X')");
    RowMatrix<Scalar> c(y_flat.rows(), x_prime.cols());
    c.noalias() = y_flat * x_prime;
    return c;
}

// ---- model ---------------------------------------------------------------------

template <typename Scalar>
ModelParams<Scalar> init_params(const NetworkHyper &hyper, RngStream &rng)
{
    ModelParams<Scalar> p = ModelParams<Scalar>::zeros(hyper);
    auto fill = [&rng](Matrix<Scalar> &w, double fan_in, double fan_out) {
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (Index j = 0; j < w.cols(); ++j)
            for (Index i = 0; i < w.rows(); ++i)
                w(i, j) = Scalar(rng.uniform(-bound, bound));
    };
    const double n = double(hyper.n_bs());
    const double m = double(hyper.m);
    fill(p.x_tilde, n, m);
    fill(p.x_prime, 2 * m, 2 * n);
    for (Index u = 0; u < hyper.n_re; ++u)
        fill(p.units[std::size_t(u)].kernels, 9.0 * double(hyper.unit_in(u)), 9.0 * double(hyper.unit_out(u)));
    fill(p.output_conv, 9.0 * double(hyper.last_channels()), 18.0);
    return p;
}

namespace
{

template <typename Scalar>
void check_params(const ModelParams<Scalar> &p)
{
    const auto &h = p.hyper;
    const Index n = h.n_bs();
    bool ok = p.x_tilde.rows() == n && p.x_tilde.cols() == h.m && p.x_prime.rows() == 2 * h.m &&
              p.x_prime.cols() == 2 * n && Index(p.units.size()) == h.n_re &&
              p.output_conv.rows() == 9 * h.last_channels() && p.output_conv.cols() == 2;
    for (Index u = 0; ok && u < h.n_re; ++u)
    {
        const auto &cu = p.units[std::size_t(u)];
        ok = cu.kernels.rows() == 9 * h.unit_in(u) && cu.kernels.cols() == h.unit_out(u) &&
             cu.gamma.rows() == h.unit_out(u) && cu.beta.rows() == h.unit_out(u) &&
             cu.running_mean.size() == h.unit_out(u) && cu.running_var.size() == h.unit_out(u);
    }
    if (!ok)
        throw ShapeError("ModelParams: tensor shapes do not match the hyperparameters");
}

// (B, 2N) rows [c_re | c_im] <-> (B * N, 2) feature maps
template <typename Scalar>
RowMatrix<Scalar> rows_to_maps(const RowMatrix<Scalar> &rows, Index n)
{
    const Index batch = rows.rows();
    RowMatrix<Scalar> maps(batch * n, 2);
    for (Index b = 0; b < batch; ++b)
        for (Index r = 0; r < 2; ++r)
            maps.col(r).segment(b * n, n) = rows.row(b).segment(r * n, n).transpose();
    return maps;
}

template <typename Scalar>
RowMatrix<Scalar> maps_to_rows(const RowMatrix<Scalar> &maps, Index n)
{
    const Index batch = maps.rows() / n;
    RowMatrix<Scalar> rows(batch, 2 * n);
    for (Index b = 0; b < batch; ++b)
        for (Index r = 0; r < 2; ++r)
            rows.row(b).segment(r * n, n) = maps.col(r).segment(b * n, n).transpose();
    return rows;
}

template <typename Scalar>
RowMatrix<Scalar> forward_impl(const ModelParams<Scalar> &params, const RowMatrix<Scalar> &batch,
                               const NoiseConfig &noise, RngStream *rng, BnMode mode, ForwardTape<Scalar> *tape,
                               MacCounter *counter, ModelParams<Scalar> *stats_sink)
{
    const auto &h = params.hyper;
    check_params(params);
    const Index n = h.n_bs();
    const Index m = h.m;
    const Index batch_size = batch.rows();
    if (batch_size < 1 || batch.cols() != 2 * n)
        throw ShapeError("model_forward: batch must be (B, 2 N_BS)");
    if (mode == BnMode::train && h.n_re > 0 && batch_size < 2)
        throw ShapeError("model_forward: train-mode batch norm needs a batch of at least 2");
    if (noise.kind != NoiseConfig::Kind::none && rng == nullptr)
        throw ConfigError("model_forward: noise requested without a random stream");

    ForwardTape<Scalar> local;
    ForwardTape<Scalar> &t = tape ? *tape : local;
    const std::uint64_t b64 = std::uint64_t(batch_size);

    // Compression through the shared real pilot: (2B, N) x (N, M)
    t.input = batch;
    t.measurement.resize(batch_size, 2 * m);
    {
        Eigen::Map<const RowMatrix<Scalar>> h_in(batch.data(), 2 * batch_size, n);
        Eigen::Map<RowMatrix<Scalar>> y(t.measurement.data(), 2 * batch_size, m);
        y.noalias() = h_in * params.x_tilde;
    }
    if (counter)
        counter->pilot += b64 * 2 * std::uint64_t(n) * std::uint64_t(m);

    t.noise_calibrated = false;
    t.noise_scale = 0.0;
    if (noise.kind == NoiseConfig::Kind::none)
    {
        t.unit_noise.resize(0, 0);
        t.received = t.measurement;
    }
    else
    {
        t.unit_noise.resize(batch_size, 2 * m);
        const double half = std::sqrt(0.5);
        for (Index i = 0; i < batch_size; ++i)
            for (Index j = 0; j < 2 * m; ++j)
                t.unit_noise(i, j) = Scalar(half * rng->gaussian());
        double sigma2 = noise.noise_sigma2;
        if (noise.kind == NoiseConfig::Kind::target_snr)
        {
            const double power = double(t.measurement.template cast<double>().squaredNorm()) / double(batch_size * m);
            t.noise_snr_linear = db_to_linear(noise.snr_db);
            sigma2 = power / t.noise_snr_linear;
            t.noise_calibrated = true;
        }
        if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
            throw NumericError("model_forward: invalid noise variance");
        t.noise_scale = std::sqrt(sigma2);
        t.received = t.measurement + Scalar(t.noise_scale) * t.unit_noise;
    }

    const RowMatrix<Scalar> coarse = coarse_estimate(t.received, params.x_prime);
    if (counter)
        counter->coarse += b64 * 2 * std::uint64_t(m) * 2 * std::uint64_t(n);

    const RowMatrix<Scalar> coarse_maps = rows_to_maps(coarse, n);
    RowMatrix<Scalar> x = coarse_maps;
    t.units.resize(std::size_t(h.n_re));
    if (counter)
        counter->conv.assign(std::size_t(h.n_re), 0);
    for (Index u = 0; u < h.n_re; ++u)
    {
        const auto &cu = params.units[std::size_t(u)];
        auto &ut = t.units[std::size_t(u)];
        ut.cols = im2col(x, h.n_h, h.n_v);
        RowMatrix<Scalar> z(ut.cols.rows(), cu.kernels.cols());
        z.noalias() = ut.cols * cu.kernels;
        if (counter)
            counter->conv[std::size_t(u)] +=
                std::uint64_t(z.rows()) * std::uint64_t(ut.cols.cols()) * std::uint64_t(z.cols());

        Vector<Scalar> mean, var;
        ut.pre_activation = bn_forward_core(z, cu.gamma, cu.beta, cu.running_mean, cu.running_var, mode,
                                            h.bn_epsilon, &ut.bn, &mean, &var);
        if (mode == BnMode::train && stats_sink)
        {
            auto &su = stats_sink->units[std::size_t(u)];
            const Scalar mom = Scalar(h.bn_momentum);
            su.running_mean = mom * su.running_mean + (Scalar(1) - mom) * mean;
            su.running_var = mom * su.running_var + (Scalar(1) - mom) * var;
        }
        x = leaky_relu(ut.pre_activation, h.leaky_slope);
    }

    t.output_cols = im2col(x, h.n_h, h.n_v);
    RowMatrix<Scalar> final_maps(t.output_cols.rows(), 2);
    final_maps.noalias() = t.output_cols * params.output_conv;
    if (counter)
        counter->output_conv += std::uint64_t(final_maps.rows()) * std::uint64_t(t.output_cols.cols()) * 2;
    final_maps += coarse_maps;

    RowMatrix<Scalar> out = maps_to_rows(final_maps, n);
    if (!out.allFinite())
        throw NumericError("model_forward: non-finite activations");
    return out;
}

} // namespace

template <typename Scalar>
RowMatrix<Scalar> model_forward(ModelParams<Scalar> &params, const RowMatrix<Scalar> &batch, const NoiseConfig &noise,
                                RngStream *rng, BnMode mode, ForwardTape<Scalar> *tape, MacCounter *counter)
{
    return forward_impl(params, batch, noise, rng, mode, tape, counter, &params);
}

template <typename Scalar>
RowMatrix<Scalar> predict(const ModelParams<Scalar> &params, const RowMatrix<Scalar> &batch, const NoiseConfig &noise,
                          RngStream *rng, MacCounter *counter)
{
    return forward_impl<Scalar>(params, batch, noise, rng, BnMode::infer, nullptr, counter, nullptr);
}

template <typename Scalar>
ModelGrads<Scalar> model_backward(const ModelParams<Scalar> &params, const ForwardTape<Scalar> &tape,
                                  const RowMatrix<Scalar> &d_output)
{
    const auto &h = params.hyper;
    const Index n = h.n_bs();
    const Index m = h.m;
    const Index batch_size = tape.input.rows();
    if (d_output.rows() != batch_size || d_output.cols() != 2 * n || Index(tape.units.size()) != h.n_re)
        throw ShapeError("model_backward: gradient shape does not match the recorded forward pass");

    ModelGrads<Scalar> g = ModelGrads<Scalar>::zeros_like(params);

    const RowMatrix<Scalar> d_final = rows_to_maps(d_output, n);
    RowMatrix<Scalar> d_coarse_maps = d_final; // residual branch

    g.output_conv.noalias() = tape.output_cols.transpose() * d_final;
    RowMatrix<Scalar> d_cols(tape.output_cols.rows(), tape.output_cols.cols());
    d_cols.noalias() = d_final * params.output_conv.transpose();
    RowMatrix<Scalar> dx = col2im(d_cols, h.n_h, h.n_v);

    for (Index u = h.n_re - 1; u >= 0; --u)
    {
        const auto &cu = params.units[std::size_t(u)];
        const auto &ut = tape.units[std::size_t(u)];
        const RowMatrix<Scalar> d_pre = leaky_relu_backward(ut.pre_activation, dx, h.leaky_slope);
        BatchNormGrads<Scalar> bn = batchnorm_backward(d_pre, ut.bn, cu.gamma);
        g.units[std::size_t(u)].gamma = std::move(bn.d_gamma);
        g.units[std::size_t(u)].beta = std::move(bn.d_beta);
        ConvGrads<Scalar> cg = conv2d_backward(ut.cols, cu.kernels, bn.d_input, h.n_h, h.n_v);
        g.units[std::size_t(u)].kernels = std::move(cg.d_kernels);
        dx = std::move(cg.d_input);
    }
    d_coarse_maps += dx;

    const RowMatrix<Scalar> d_coarse = maps_to_rows(d_coarse_maps, n);
    g.x_prime.noalias() = tape.received.transpose() * d_coarse;
    RowMatrix<Scalar> d_meas(batch_size, 2 * m);
    d_meas.noalias() = d_coarse * params.x_prime.transpose();

    if (tape.noise_calibrated && tape.noise_scale > 0.0)
    {
        // noise = s Z with s^2 = ||Y||^2 / (B M snr): ds/dY = Y / (s B M snr)
        const double d_scale = double((d_meas.array() * tape.unit_noise.array()).template cast<double>().sum());
        const double factor = d_scale / (tape.noise_scale * double(batch_size * m) * tape.noise_snr_linear);
        d_meas += Scalar(factor) * tape.measurement;
    }

    Eigen::Map<const RowMatrix<Scalar>> h_in(tape.input.data(), 2 * batch_size, n);
    Eigen::Map<const RowMatrix<Scalar>> d_y(d_meas.data(), 2 * batch_size, m);
    g.x_tilde.noalias() = h_in.transpose() * d_y;
    return g;
}

template <typename Scalar>
Scalar mse_loss(const RowMatrix<Scalar> &pred, const RowMatrix<Scalar> &target)
{
    if (pred.rows() != target.rows() || pred.cols() != target.cols() || pred.rows() < 1)
        throw ShapeError("mse_loss: predictions and targets must have equal non-empty shapes");
    return Scalar((pred - target).template cast<double>().squaredNorm() / double(pred.rows()));
}

template <typename Scalar>
RowMatrix<Scalar> mse_loss_grad(const RowMatrix<Scalar> &pred, const RowMatrix<Scalar> &target)
{
    if (pred.rows() != target.rows() || pred.cols() != target.cols() || pred.rows() < 1)
        throw ShapeError("mse_loss_grad: predictions and targets must have equal non-empty shapes");
    return (Scalar(2) / Scalar(pred.rows())) * (pred - target);
}

// ---- optimization ----------------------------------------------------------------

template <typename Scalar>
AdamState<Scalar> make_adam_state(const std::vector<const Matrix<Scalar> *> &shapes)
{
    AdamState<Scalar> s;
    for (const auto *p : shapes)
    {
        s.first.push_back(Matrix<Scalar>::Zero(p->rows(), p->cols()));
        s.second.push_back(Matrix<Scalar>::Zero(p->rows(), p->cols()));
    }
    return s;
}

template <typename Scalar>
AdamState<Scalar> make_adam_state(const ModelParams<Scalar> &params)
{
    std::vector<const Matrix<Scalar> *> shapes;
    for_each_trainable(params, [&](const Matrix<Scalar> &t) { shapes.push_back(&t); });
    return make_adam_state(shapes);
}

template <typename Scalar>
void adam_update(const std::vector<Matrix<Scalar> *> &params, const std::vector<const Matrix<Scalar> *> &grads,
                 AdamState<Scalar> &state, const TrainConfig &cfg)
{
    if (params.size() != grads.size() || params.size() != state.first.size() || params.size() != state.second.size())
        throw ShapeError("adam_update: parameter, gradient and moment lists differ in length");
    for (std::size_t i = 0; i < params.size(); ++i)
    {
        if (params[i]->rows() != grads[i]->rows() || params[i]->cols() != grads[i]->cols() ||
            state.first[i].rows() != grads[i]->rows() || state.first[i].cols() != grads[i]->cols())
            throw ShapeError("adam_update: gradient shape mismatch");
        if (!grads[i]->allFinite())
            throw NumericError("adam_update: non-finite gradient, step refused");
    }

    state.t += 1;
    const double c1 = 1.0 - std::pow(cfg.beta1, double(state.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, double(state.t));
    const Scalar b1 = Scalar(cfg.beta1), b2 = Scalar(cfg.beta2);
    const Scalar lr = Scalar(cfg.learning_rate), eps = Scalar(cfg.adam_epsilon);
    const Scalar inv_c1 = Scalar(1.0 / c1), inv_c2 = Scalar(1.0 / c2);
    for (std::size_t i = 0; i < params.size(); ++i)
    {
        auto &mom1 = state.first[i];
        auto &mom2 = state.second[i];
        const auto &g = *grads[i];
        mom1 = b1 * mom1 + (Scalar(1) - b1) * g;
        mom2 = b2 * mom2 + (Scalar(1) - b2) * g.cwiseProduct(g);
        params[i]->array() -= lr * (mom1.array() * inv_c1) / ((mom2.array() * inv_c2).sqrt() + eps);
    }
}

template <typename Scalar>
void adam_step(ModelParams<Scalar> &params, const ModelGrads<Scalar> &grads, AdamState<Scalar> &state,
               const TrainConfig &cfg)
{
    std::vector<Matrix<Scalar> *> p;
    std::vector<const Matrix<Scalar> *> g;
    for_each_trainable(params, [&](Matrix<Scalar> &t) { p.push_back(&t); });
    for_each_trainable(grads, [&](const Matrix<Scalar> &t) { g.push_back(&t); });
    adam_update(p, g, state, cfg);
}

template <typename Scalar>
RowMatrix<Scalar> gather_rows(const StackedDataset &ds, const std::vector<std::size_t> &rows)
{
    const Index width = 2 * ds.n_bs();
    RowMatrix<Scalar> out(Index(rows.size()), width);
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        if (rows[i] >= ds.n_samples())
            throw ShapeError("gather_rows: row index out of range");
        out.row(Index(i)) = Eigen::Map<const Eigen::Matrix<float, 1, Eigen::Dynamic>>(ds.samples.slice(rows[i]), width)
                                .template cast<Scalar>();
    }
    return out;
}

template <typename Scalar>
RowMatrix<Scalar> dataset_rows(const StackedDataset &ds, std::size_t first, std::size_t count)
{
    if (first + count > ds.n_samples())
        throw ShapeError("dataset_rows: range out of bounds");
    const Index width = 2 * ds.n_bs();
    return Eigen::Map<const RowMatrix<float>>(ds.samples.slice(first), Index(count), width).template cast<Scalar>();
}

template <typename Scalar>
double dataset_loss(const ModelParams<Scalar> &params, const StackedDataset &ds, const NoiseConfig &noise,
                    RngStream *rng)
{
    if (ds.n_samples() == 0)
        throw ShapeError("dataset_loss: empty dataset");
    constexpr std::size_t chunk = 256;
    double acc = 0.0;
    for (std::size_t start = 0; start < ds.n_samples(); start += chunk)
    {
        const std::size_t count = std::min(chunk, ds.n_samples() - start);
        const RowMatrix<Scalar> target = dataset_rows<Scalar>(ds, start, count);
        const RowMatrix<Scalar> pred = predict(params, target, noise, rng);
        acc += (pred - target).template cast<double>().squaredNorm();
    }
    return acc / double(ds.n_samples());
}

template <typename Scalar>
TrainHistory fit(ModelParams<Scalar> &params, const StackedDataset &train_set, const StackedDataset *val_set,
                 const TrainConfig &cfg, const EpochCallback &on_epoch)
{
    cfg.validate();
    params.hyper.validate();
    const std::size_t n_train = train_set.n_samples();
    if (n_train == 0)
        throw ShapeError("train: empty training set");
    if (train_set.n_bs() != params.hyper.n_bs() || (val_set && val_set->n_bs() != params.hyper.n_bs()))
        throw ShapeError("train: dataset N_BS does not match the network");
    if (std::size_t(cfg.batch_size) > n_train)
        throw ConfigError("train: batch_size exceeds the training set size");

    RngStream shuffle_rng(cfg.seed, 0x5348'5546ull);
    RngStream noise_rng(cfg.seed, 0x4e4f'4953ull);
    const NoiseConfig noise = cfg.snr_db ? NoiseConfig::target_snr(*cfg.snr_db) : NoiseConfig::noiseless();

    AdamState<Scalar> adam = make_adam_state(params);
    TrainHistory history;
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), std::size_t(0));
    ForwardTape<Scalar> tape;

    bool done = false;
    for (Index epoch = 0; epoch < cfg.epochs && !done; ++epoch)
    {
        if (cfg.shuffle)
            for (std::size_t i = n_train - 1; i > 0; --i)
                std::swap(order[i], order[shuffle_rng.below(i + 1)]);

        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n_train; start += std::size_t(cfg.batch_size))
        {
            const std::size_t count = std::min(std::size_t(cfg.batch_size), n_train - start);
            if (count < 2 && params.hyper.n_re > 0)
                break;
            const std::vector<std::size_t> rows(order.begin() + std::ptrdiff_t(start),
                                                order.begin() + std::ptrdiff_t(start + count));
            const RowMatrix<Scalar> batch = gather_rows<Scalar>(train_set, rows);
            const RowMatrix<Scalar> pred = model_forward(params, batch, noise, &noise_rng, BnMode::train, &tape);
            const double loss = double(mse_loss(pred, batch));
            if (!std::isfinite(loss))
                throw NumericError("train: non-finite loss");
            const ModelGrads<Scalar> grads = model_backward(params, tape, mse_loss_grad(pred, batch));
            adam_step(params, grads, adam, cfg);
            loss_sum += loss;
            ++batches;
            ++history.steps;
            if (cfg.max_steps > 0 && history.steps >= cfg.max_steps)
            {
                done = true;
                break;
            }
        }
        history.train_loss.push_back(batches ? loss_sum / double(batches) : std::nan(""));

        double val = std::nan("");
        if (val_set && val_set->n_samples() > 0)
        {
            RngStream val_rng(cfg.seed, 0x5641'4c00ull);
            NoiseConfig val_noise = NoiseConfig::noiseless();
            if (cfg.snr_db)
                val_noise = NoiseConfig::fixed(calibrate_snr(*val_set, extract_pilot(params), *cfg.snr_db));
            val = dataset_loss(params, *val_set, val_noise, &val_rng);
        }
        history.val_loss.push_back(val);
        if (on_epoch)
            on_epoch(epoch, history.train_loss.back(), val);
    }
    return history;
}

template <typename Scalar>
TrainResult<Scalar> train(const StackedDataset &train_set, const StackedDataset *val_set, const NetworkHyper &hyper,
                          const TrainConfig &cfg, const EpochCallback &on_epoch)
{
    RngStream init_rng(cfg.seed, 0x494e'4954ull);
    TrainResult<Scalar> r{init_params<Scalar>(hyper, init_rng), {}};
    r.history = fit(r.params, train_set, val_set, cfg, on_epoch);
    return r;
}

ComplexMatrix<double> transmit_matrix(const PilotMatrix<double> &pilot, Index n_h, Index n_v)
{
    if (pilot.n_bs() != n_h * n_v)
        throw ShapeError("transmit_matrix: pilot rows must equal n_h * n_v");
    return angular_basis(n_h, n_v) * pilot.x_tilde.cast<Complex<double>>();
}

// ---- instantiations ----------------------------------------------------------------

#define PILOTNET_INSTANTIATE(S)                                                                                      \
    template struct ModelParams<S>;                                                                                  \
    template ModelParams<float> ModelParams<S>::cast<float>() const;                                                 \
    template ModelParams<double> ModelParams<S>::cast<double>() const;                                               \
    template struct ModelGrads<S>;                                                                                   \
    template RowMatrix<S> im2col(const RowMatrix<S> &, Index, Index);                                                \
    template RowMatrix<S> col2im(const RowMatrix<S> &, Index, Index);                                                \
    template RowMatrix<S> conv2d_forward(const RowMatrix<S> &, const Matrix<S> &, Index, Index);                     \
    template RealTensor3<S> conv2d_forward(const RealTensor3<S> &, const Matrix<S> &);                               \
    template ConvGrads<S> conv2d_backward(const RowMatrix<S> &, const Matrix<S> &, const RowMatrix<S> &, Index,      \
                                          Index);                                                                    \
    template RowMatrix<S> batchnorm_forward(const RowMatrix<S> &, const Matrix<S> &, const Matrix<S> &, Vector<S> &, \
                                            Vector<S> &, BnMode, double, double, BatchNormCache<S> *);               \
    template BatchNormGrads<S> batchnorm_backward(const RowMatrix<S> &, const BatchNormCache<S> &,                    \
                                                  const Matrix<S> &);                                                \
    template RowMatrix<S> coarse_estimate(const RowMatrix<S> &, const Matrix<S> &);                                  \
    template ModelParams<S> init_params(const NetworkHyper &, RngStream &);                                          \
    template RowMatrix<S> model_forward(ModelParams<S> &, const RowMatrix<S> &, const NoiseConfig &, RngStream *,    \
                                        BnMode, ForwardTape<S> *, MacCounter *);                                     \
    template RowMatrix<S> predict(const ModelParams<S> &, const RowMatrix<S> &, const NoiseConfig &, RngStream *,    \
                                  MacCounter *);                                                                     \
    template ModelGrads<S> model_backward(const ModelParams<S> &, const ForwardTape<S> &, const RowMatrix<S> &);     \
    template S mse_loss(const RowMatrix<S> &, const RowMatrix<S> &);                                                 \
    template RowMatrix<S> mse_loss_grad(const RowMatrix<S> &, const RowMatrix<S> &);                                 \
    template AdamState<S> make_adam_state(const std::vector<const Matrix<S> *> &);                                   \
    template AdamState<S> make_adam_state(const ModelParams<S> &);                                                   \
    template void adam_update(const std::vector<Matrix<S> *> &, const std::vector<const Matrix<S> *> &,              \
                              AdamState<S> &, const TrainConfig &);                                                  \
    template void adam_step(ModelParams<S> &, const ModelGrads<S> &, AdamState<S> &, const TrainConfig &);           \
    template RowMatrix<S> gather_rows(const StackedDataset &, const std::vector<std::size_t> &);                     \
    template RowMatrix<S> dataset_rows(const StackedDataset &, std::size_t, std::size_t);                            \
    template double dataset_loss(const ModelParams<S> &, const StackedDataset &, const NoiseConfig &, RngStream *);  \
    template TrainHistory fit(ModelParams<S> &, const StackedDataset &, const StackedDataset *, const TrainConfig &,  \
                              const EpochCallback &);                                                                \
    template TrainResult<S> train(const StackedDataset &, const StackedDataset *, const NetworkHyper &,              \
                                  const TrainConfig &, const EpochCallback &);

PILOTNET_INSTANTIATE(float)
PILOTNET_INSTANTIATE(double)

#undef PILOTNET_INSTANTIATE

} // namespace pilotnet
