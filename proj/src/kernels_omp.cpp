#include <cmath>
#include <cstring>

// Parallel kernels. Every loop assigns each output element to exactly one
// iteration and accumulates in a fixed order, so results are identical for
// any thread count (and bit-identical to a 1-thread run). Backward passes
// are therefore written in gather form rather than the scatter form used by
// the serial reference.
//
// Inner loops run over the last axis (channels / cout), which is contiguous
// in the NHWC layout used throughout, so they vectorize.

namespace rbfood::kern::omp {

void conv3x3_forward(const double* in, int n, int h, int w, int cin,
                     const double* kernel, const double* bias, int cout, double* out) {
    const long total = static_cast<long>(n) * h * w;
#pragma omp parallel for schedule(static)
    for (long p = 0; p < total; ++p) {
        const int b = static_cast<int>(p / (static_cast<long>(h) * w));
        const int y = static_cast<int>((p / w) % h);
        const int x = static_cast<int>(p % w);
        double* o = out + p * cout;
        for (int co = 0; co < cout; ++co) o[co] = bias[co];
        for (int dy = 0; dy < 3; ++dy) {
            const int sy = y + dy - 1;
            if (sy < 0 || sy >= h) continue;
            for (int dx = 0; dx < 3; ++dx) {
                const int sx = x + dx - 1;
                if (sx < 0 || sx >= w) continue;
                const double* src = in + (((static_cast<long>(b) * h + sy) * w + sx) * cin);
                const double* kk = kernel + ((static_cast<long>(dy) * 3 + dx) * cin) * cout;
                for (int ci = 0; ci < cin; ++ci) {
                    const double v = src[ci];
                    const double* kr = kk + static_cast<long>(ci) * cout;
                    for (int co = 0; co < cout; ++co) o[co] += v * kr[co];
                }
            }
        }
    }
}

void conv3x3_backward_input(const double* dout, int n, int h, int w, int cout,
                            const double* kernel, int cin, double* din) {
    const long total = static_cast<long>(n) * h * w;
#pragma omp parallel for schedule(static)
    for (long p = 0; p < total; ++p) {
        const int b = static_cast<int>(p / (static_cast<long>(h) * w));
        const int sy = static_cast<int>((p / w) % h);
        const int sx = static_cast<int>(p % w);
        double* gi = din + p * cin;
        for (int ci = 0; ci < cin; ++ci) gi[ci] = 0.0;
        // Input pixel (sy,sx) was read by output pixel (y,x) with offset
        // (dy,dx) iff y = sy - dy + 1, x = sx - dx + 1.
        for (int dy = 0; dy < 3; ++dy) {
            const int y = sy - dy + 1;
            if (y < 0 || y >= h) continue;
            for (int dx = 0; dx < 3; ++dx) {
                const int x = sx - dx + 1;
                if (x < 0 || x >= w) continue;
                const double* go = dout + (((static_cast<long>(b) * h + y) * w + x) * cout);
                const double* kk = kernel + ((static_cast<long>(dy) * 3 + dx) * cin) * cout;
                for (int ci = 0; ci < cin; ++ci) {
                    const double* kr = kk + static_cast<long>(ci) * cout;
                    double acc = 0.0;
                    for (int co = 0; co < cout; ++co) acc += go[co] * kr[co];
                    gi[ci] += acc;
                }
            }
        }
    }
}

void conv3x3_backward_params(const double* in, const double* dout, int n, int h, int w,
                             int cin, int cout, double* dkernel, double* dbias) {
    const long taps = 9L * cin;
#pragma omp parallel for schedule(static)
    for (long t = 0; t < taps; ++t) {
        const int dy = static_cast<int>(t / (3L * cin));
        const int dx = static_cast<int>((t / cin) % 3);
        const int ci = static_cast<int>(t % cin);
        double* gr = dkernel + t * cout;
        for (int co = 0; co < cout; ++co) gr[co] = 0.0;
        for (int b = 0; b < n; ++b) {
            for (int y = 0; y < h; ++y) {
                const int sy = y + dy - 1;
                if (sy < 0 || sy >= h) continue;
                for (int x = 0; x < w; ++x) {
                    const int sx = x + dx - 1;
                    if (sx < 0 || sx >= w) continue;
                    const double v = in[(((static_cast<long>(b) * h + sy) * w + sx) * cin) + ci];
                    if (v == 0.0) continue;
                    const double* go = dout + (((static_cast<long>(b) * h + y) * w + x) * cout);
                    for (int co = 0; co < cout; ++co) gr[co] += v * go[co];
                }
            }
        }
    }
    const long pixels = static_cast<long>(n) * h * w;
#pragma omp parallel for schedule(static)
    for (int co = 0; co < cout; ++co) {
        double acc = 0.0;
        for (long p = 0; p < pixels; ++p) acc += dout[p * cout + co];
        dbias[co] = acc;
    }
}

void deconv2x_forward(const double* in, int n, int h, int w, int cin,
                      const double* kernel, const double* bias, int cout, double* out) {
    const int oh = 2 * h, ow = 2 * w;
    const long total = static_cast<long>(n) * oh * ow;
#pragma omp parallel for schedule(static)
    for (long p = 0; p < total; ++p) {
        const int b = static_cast<int>(p / (static_cast<long>(oh) * ow));
        const int oy = static_cast<int>((p / ow) % oh);
        const int ox = static_cast<int>(p % ow);
        double* o = out + p * cout;
        const double* src = in + (((static_cast<long>(b) * h + oy / 2) * w + ox / 2) * cin);
        const double* kk = kernel + ((static_cast<long>(oy % 2) * 2 + ox % 2) * cin) * cout;
        for (int co = 0; co < cout; ++co) o[co] = bias[co];
        for (int ci = 0; ci < cin; ++ci) {
            const double v = src[ci];
            const double* kr = kk + static_cast<long>(ci) * cout;
            for (int co = 0; co < cout; ++co) o[co] += v * kr[co];
        }
    }
}

void deconv2x_backward_input(const double* dout, int n, int h, int w, int cout,
                             const double* kernel, int cin, double* din) {
    const int ow = 2 * w;
    const long total = static_cast<long>(n) * h * w;
#pragma omp parallel for schedule(static)
    for (long p = 0; p < total; ++p) {
        const int b = static_cast<int>(p / (static_cast<long>(h) * w));
        const int y = static_cast<int>((p / w) % h);
        const int x = static_cast<int>(p % w);
        double* gi = din + p * cin;
        for (int ci = 0; ci < cin; ++ci) gi[ci] = 0.0;
        for (int ky = 0; ky < 2; ++ky) {
            for (int kx = 0; kx < 2; ++kx) {
                const long op = ((static_cast<long>(b) * 2 * h + 2 * y + ky) * ow + 2 * x + kx);
                const double* go = dout + op * cout;
                const double* kk = kernel + ((static_cast<long>(ky) * 2 + kx) * cin) * cout;
                for (int ci = 0; ci < cin; ++ci) {
                    const double* kr = kk + static_cast<long>(ci) * cout;
                    double acc = 0.0;
                    for (int co = 0; co < cout; ++co) acc += go[co] * kr[co];
                    gi[ci] += acc;
                }
            }
        }
    }
}

void deconv2x_backward_params(const double* in, const double* dout, int n, int h, int w,
                              int cin, int cout, double* dkernel, double* dbias) {
    const int oh = 2 * h, ow = 2 * w;
    const long taps = 4L * cin;
#pragma omp parallel for schedule(static)
    for (long t = 0; t < taps; ++t) {
        const int ky = static_cast<int>(t / (2L * cin));
        const int kx = static_cast<int>((t / cin) % 2);
        const int ci = static_cast<int>(t % cin);
        double* gr = dkernel + t * cout;
        for (int co = 0; co < cout; ++co) gr[co] = 0.0;
        for (int b = 0; b < n; ++b) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const double v = in[(((static_cast<long>(b) * h + y) * w + x) * cin) + ci];
                    if (v == 0.0) continue;
                    const long op = ((static_cast<long>(b) * oh + 2 * y + ky) * ow + 2 * x + kx);
                    const double* go = dout + op * cout;
                    for (int co = 0; co < cout; ++co) gr[co] += v * go[co];
                }
            }
        }
    }
    const long pixels = static_cast<long>(n) * oh * ow;
#pragma omp parallel for schedule(static)
    for (int co = 0; co < cout; ++co) {
        double acc = 0.0;
        for (long p = 0; p < pixels; ++p) acc += dout[p * cout + co];
        dbias[co] = acc;
    }
}

void dense_forward(const double* in, int rows, int din,
                   const double* weight, const double* bias, int dout, double* out) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
        const double* x = in + static_cast<long>(r) * din;
        double* o = out + static_cast<long>(r) * dout;
        for (int j = 0; j < dout; ++j) o[j] = bias[j];
        for (int i = 0; i < din; ++i) {
            const double v = x[i];
            const double* wr = weight + static_cast<long>(i) * dout;
            for (int j = 0; j < dout; ++j) o[j] += v * wr[j];
        }
    }
}

void dense_backward_input(const double* dout, int rows, int dout_dim,
                          const double* weight, int din, double* din_out) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
        const double* go = dout + static_cast<long>(r) * dout_dim;
        double* gi = din_out + static_cast<long>(r) * din;
        for (int i = 0; i < din; ++i) {
            const double* wr = weight + static_cast<long>(i) * dout_dim;
            double acc = 0.0;
            for (int j = 0; j < dout_dim; ++j) acc += go[j] * wr[j];
            gi[i] = acc;
        }
    }
}

void dense_backward_params(const double* in, const double* dout, int rows, int din,
                           int dout_dim, double* dweight, double* dbias) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < din; ++i) {
        double* wr = dweight + static_cast<long>(i) * dout_dim;
        for (int j = 0; j < dout_dim; ++j) wr[j] = 0.0;
        for (int r = 0; r < rows; ++r) {
            const double v = in[static_cast<long>(r) * din + i];
            if (v == 0.0) continue;
            const double* go = dout + static_cast<long>(r) * dout_dim;
            for (int j = 0; j < dout_dim; ++j) wr[j] += v * go[j];
        }
    }
#pragma omp parallel for schedule(static)
    for (int j = 0; j < dout_dim; ++j) {
        double acc = 0.0;
        for (int r = 0; r < rows; ++r) acc += dout[static_cast<long>(r) * dout_dim + j];
        dbias[j] = acc;
    }
}

void rbf_forward(const double* feat, int n, int d, const double* centers,
                 const double* weights, int c, int k, double inv_two_sigma_sq,
                 double* h, double* e_cache) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const double* f = feat + static_cast<long>(i) * d;
        for (int cc = 0; cc < c; ++cc) {
            double acc = 0.0;
            for (int kk = 0; kk < k; ++kk) {
                const double* mu = centers + ((static_cast<long>(cc) * k + kk) * d);
                double dist2 = 0.0;
                for (int j = 0; j < d; ++j) {
                    const double diff = f[j] - mu[j];
                    dist2 += diff * diff;
                }
                const double e = std::exp(-dist2 * inv_two_sigma_sq);
                if (e_cache) e_cache[(static_cast<long>(i) * c + cc) * k + kk] = e;
                acc += weights[static_cast<long>(cc) * k + kk] * e;
            }
            h[static_cast<long>(i) * c + cc] = acc;
        }
    }
}

void rbf_backward(const double* feat, int n, int d, const double* centers,
                  const double* weights, int c, int k, double inv_two_sigma_sq,
                  const double* e_cache, const double* upstream,
                  double* dfeat, double* dcenters, double* dweights) {
    const double two_inv = 2.0 * inv_two_sigma_sq;  // 1 / sigma^2
    if (dfeat) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            const double* f = feat + static_cast<long>(i) * d;
            double* gf = dfeat + static_cast<long>(i) * d;
            for (int j = 0; j < d; ++j) gf[j] = 0.0;
            for (int cc = 0; cc < c; ++cc) {
                const double u = upstream[static_cast<long>(i) * c + cc];
                if (u == 0.0) continue;
                for (int kk = 0; kk < k; ++kk) {
                    const double e = e_cache[(static_cast<long>(i) * c + cc) * k + kk];
                    const double scale =
                        u * weights[static_cast<long>(cc) * k + kk] * e * two_inv;
                    if (scale == 0.0) continue;
                    const double* mu = centers + ((static_cast<long>(cc) * k + kk) * d);
                    for (int j = 0; j < d; ++j) gf[j] += scale * (mu[j] - f[j]);
                }
            }
        }
    }
    if (dcenters || dweights) {
        const long ck = static_cast<long>(c) * k;
#pragma omp parallel for schedule(static)
        for (long t = 0; t < ck; ++t) {
            const int cc = static_cast<int>(t / k);
            const double wgt = weights[t];
            const double* mu = centers + t * d;
            double* gc = dcenters ? dcenters + t * d : nullptr;
            if (gc)
                for (int j = 0; j < d; ++j) gc[j] = 0.0;
            double gw = 0.0;
            for (int i = 0; i < n; ++i) {
                const double u = upstream[static_cast<long>(i) * c + cc];
                if (u == 0.0) continue;
                const double e = e_cache[static_cast<long>(i) * ck + t];
                gw += u * e;
                if (gc) {
                    const double scale = u * wgt * e * two_inv;
                    if (scale == 0.0) continue;
                    const double* f = feat + static_cast<long>(i) * d;
                    for (int j = 0; j < d; ++j) gc[j] -= scale * (mu[j] - f[j]);
                }
            }
            if (dweights) dweights[t] = gw;
        }
    }
}

}  // namespace rbfood::kern::omp
