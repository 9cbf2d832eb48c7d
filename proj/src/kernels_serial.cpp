#include <cmath>
#include <cstring>

// Reference kernels: direct textbook loops, scatter-form backward passes.
// Kept deliberately simple; the parallel versions in kernels_omp.cpp are
// checked against these.

namespace rbfood::kern::serial {

void conv3x3_forward(const double* in, int n, int h, int w, int cin,
                     const double* kernel, const double* bias, int cout, double* out) {
    for (int b = 0; b < n; ++b) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double* o = out + (((static_cast<long>(b) * h + y) * w + x) * cout);
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
    }
}

void conv3x3_backward_input(const double* dout, int n, int h, int w, int cout,
                            const double* kernel, int cin, double* din) {
    std::memset(din, 0, sizeof(double) * static_cast<std::size_t>(n) * h * w * cin);
    for (int b = 0; b < n; ++b) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double* go = dout + (((static_cast<long>(b) * h + y) * w + x) * cout);
                for (int dy = 0; dy < 3; ++dy) {
                    const int sy = y + dy - 1;
                    if (sy < 0 || sy >= h) continue;
                    for (int dx = 0; dx < 3; ++dx) {
                        const int sx = x + dx - 1;
                        if (sx < 0 || sx >= w) continue;
                        double* gi = din + (((static_cast<long>(b) * h + sy) * w + sx) * cin);
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
    }
}

void conv3x3_backward_params(const double* in, const double* dout, int n, int h, int w,
                             int cin, int cout, double* dkernel, double* dbias) {
    std::memset(dkernel, 0, sizeof(double) * 9 * static_cast<std::size_t>(cin) * cout);
    std::memset(dbias, 0, sizeof(double) * static_cast<std::size_t>(cout));
    for (int b = 0; b < n; ++b) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double* go = dout + (((static_cast<long>(b) * h + y) * w + x) * cout);
                for (int co = 0; co < cout; ++co) dbias[co] += go[co];
                for (int dy = 0; dy < 3; ++dy) {
                    const int sy = y + dy - 1;
                    if (sy < 0 || sy >= h) continue;
                    for (int dx = 0; dx < 3; ++dx) {
                        const int sx = x + dx - 1;
                        if (sx < 0 || sx >= w) continue;
                        const double* src = in + (((static_cast<long>(b) * h + sy) * w + sx) * cin);
                        double* gk = dkernel + ((static_cast<long>(dy) * 3 + dx) * cin) * cout;
                        for (int ci = 0; ci < cin; ++ci) {
                            const double v = src[ci];
                            double* gr = gk + static_cast<long>(ci) * cout;
                            for (int co = 0; co < cout; ++co) gr[co] += v * go[co];
                        }
                    }
                }
            }
        }
    }
}

void deconv2x_forward(const double* in, int n, int h, int w, int cin,
                      const double* kernel, const double* bias, int cout, double* out) {
    const int oh = 2 * h, ow = 2 * w;
    for (int b = 0; b < n; ++b) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double* o = out + (((static_cast<long>(b) * oh + oy) * ow + ox) * cout);
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
    }
}

void deconv2x_backward_input(const double* dout, int n, int h, int w, int cout,
                             const double* kernel, int cin, double* din) {
    const int oh = 2 * h, ow = 2 * w;
    std::memset(din, 0, sizeof(double) * static_cast<std::size_t>(n) * h * w * cin);
    for (int b = 0; b < n; ++b) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                const double* go = dout + (((static_cast<long>(b) * oh + oy) * ow + ox) * cout);
                double* gi = din + (((static_cast<long>(b) * h + oy / 2) * w + ox / 2) * cin);
                const double* kk = kernel + ((static_cast<long>(oy % 2) * 2 + ox % 2) * cin) * cout;
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
    std::memset(dkernel, 0, sizeof(double) * 4 * static_cast<std::size_t>(cin) * cout);
    std::memset(dbias, 0, sizeof(double) * static_cast<std::size_t>(cout));
    for (int b = 0; b < n; ++b) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                const double* go = dout + (((static_cast<long>(b) * oh + oy) * ow + ox) * cout);
                const double* src = in + (((static_cast<long>(b) * h + oy / 2) * w + ox / 2) * cin);
                double* gk = dkernel + ((static_cast<long>(oy % 2) * 2 + ox % 2) * cin) * cout;
                for (int co = 0; co < cout; ++co) dbias[co] += go[co];
                for (int ci = 0; ci < cin; ++ci) {
                    const double v = src[ci];
                    double* gr = gk + static_cast<long>(ci) * cout;
                    for (int co = 0; co < cout; ++co) gr[co] += v * go[co];
                }
            }
        }
    }
}

void dense_forward(const double* in, int rows, int din,
                   const double* weight, const double* bias, int dout, double* out) {
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
    std::memset(dweight, 0, sizeof(double) * static_cast<std::size_t>(din) * dout_dim);
    std::memset(dbias, 0, sizeof(double) * static_cast<std::size_t>(dout_dim));
    for (int r = 0; r < rows; ++r) {
        const double* x = in + static_cast<long>(r) * din;
        const double* go = dout + static_cast<long>(r) * dout_dim;
        for (int j = 0; j < dout_dim; ++j) dbias[j] += go[j];
        for (int i = 0; i < din; ++i) {
            const double v = x[i];
            double* wr = dweight + static_cast<long>(i) * dout_dim;
            for (int j = 0; j < dout_dim; ++j) wr[j] += v * go[j];
        }
    }
}

void rbf_forward(const double* feat, int n, int d, const double* centers,
                 const double* weights, int c, int k, double inv_two_sigma_sq,
                 double* h, double* e_cache) {
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
    if (dfeat) std::memset(dfeat, 0, sizeof(double) * static_cast<std::size_t>(n) * d);
    if (dcenters)
        std::memset(dcenters, 0, sizeof(double) * static_cast<std::size_t>(c) * k * d);
    if (dweights) std::memset(dweights, 0, sizeof(double) * static_cast<std::size_t>(c) * k);
    const double two_inv = 2.0 * inv_two_sigma_sq;  // 1 / sigma^2
    for (int i = 0; i < n; ++i) {
        const double* f = feat + static_cast<long>(i) * d;
        for (int cc = 0; cc < c; ++cc) {
            const double u = upstream[static_cast<long>(i) * c + cc];
            if (u == 0.0) continue;
            for (int kk = 0; kk < k; ++kk) {
                const double e = e_cache[(static_cast<long>(i) * c + cc) * k + kk];
                const double wgt = weights[static_cast<long>(cc) * k + kk];
                const double* mu = centers + ((static_cast<long>(cc) * k + kk) * d);
                if (dweights) dweights[static_cast<long>(cc) * k + kk] += u * e;
                const double scale = u * wgt * e * two_inv;
                if (scale == 0.0) continue;
                for (int j = 0; j < d; ++j) {
                    const double pull = scale * (mu[j] - f[j]);
                    if (dfeat) dfeat[static_cast<long>(i) * d + j] += pull;
                    if (dcenters) dcenters[(static_cast<long>(cc) * k + kk) * d + j] -= pull;
                }
            }
        }
    }
}

}  // namespace rbfood::kern::serial
