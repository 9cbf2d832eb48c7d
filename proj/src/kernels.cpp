#include "rbfood/kernels.hpp"

namespace rbfood::kern {

namespace serial {
void conv3x3_forward(const double*, int, int, int, int, const double*, const double*, int,
                     double*);
void conv3x3_backward_input(const double*, int, int, int, int, const double*, int, double*);
void conv3x3_backward_params(const double*, const double*, int, int, int, int, int, double*,
                             double*);
void deconv2x_forward(const double*, int, int, int, int, const double*, const double*, int,
                      double*);
void deconv2x_backward_input(const double*, int, int, int, int, const double*, int, double*);
void deconv2x_backward_params(const double*, const double*, int, int, int, int, int, double*,
                              double*);
void dense_forward(const double*, int, int, const double*, const double*, int, double*);
void dense_backward_input(const double*, int, int, const double*, int, double*);
void dense_backward_params(const double*, const double*, int, int, int, double*, double*);
void rbf_forward(const double*, int, int, const double*, const double*, int, int, double,
                 double*, double*);
void rbf_backward(const double*, int, int, const double*, const double*, int, int, double,
                  const double*, const double*, double*, double*, double*);
}  // namespace serial

namespace omp {
void conv3x3_forward(const double*, int, int, int, int, const double*, const double*, int,
                     double*);
void conv3x3_backward_input(const double*, int, int, int, int, const double*, int, double*);
void conv3x3_backward_params(const double*, const double*, int, int, int, int, int, double*,
                             double*);
void deconv2x_forward(const double*, int, int, int, int, const double*, const double*, int,
                      double*);
void deconv2x_backward_input(const double*, int, int, int, int, const double*, int, double*);
void deconv2x_backward_params(const double*, const double*, int, int, int, int, int, double*,
                              double*);
void dense_forward(const double*, int, int, const double*, const double*, int, double*);
void dense_backward_input(const double*, int, int, const double*, int, double*);
void dense_backward_params(const double*, const double*, int, int, int, double*, double*);
void rbf_forward(const double*, int, int, const double*, const double*, int, int, double,
                 double*, double*);
void rbf_backward(const double*, int, int, const double*, const double*, int, int, double,
                  const double*, const double*, double*, double*, double*);
}  // namespace omp

namespace {
Backend g_backend = Backend::Parallel;
}

Backend backend() { return g_backend; }
void set_backend(Backend b) { g_backend = b; }

#define RBFOOD_DISPATCH(fn, ...)                 \
    do {                                         \
        if (g_backend == Backend::Serial)        \
            serial::fn(__VA_ARGS__);             \
        else                                     \
            omp::fn(__VA_ARGS__);                \
    } while (0)

void conv3x3_forward(const double* in, int n, int h, int w, int cin, const double* kernel,
                     const double* bias, int cout, double* out) {
    RBFOOD_DISPATCH(conv3x3_forward, in, n, h, w, cin, kernel, bias, cout, out);
}

void conv3x3_backward_input(const double* dout, int n, int h, int w, int cout,
                            const double* kernel, int cin, double* din) {
    RBFOOD_DISPATCH(conv3x3_backward_input, dout, n, h, w, cout, kernel, cin, din);
}

void conv3x3_backward_params(const double* in, const double* dout, int n, int h, int w, int cin,
                             int cout, double* dkernel, double* dbias) {
    RBFOOD_DISPATCH(conv3x3_backward_params, in, dout, n, h, w, cin, cout, dkernel, dbias);
}

void deconv2x_forward(const double* in, int n, int h, int w, int cin, const double* kernel,
                      const double* bias, int cout, double* out) {
    RBFOOD_DISPATCH(deconv2x_forward, in, n, h, w, cin, kernel, bias, cout, out);
}

void deconv2x_backward_input(const double* dout, int n, int h, int w, int cout,
                             const double* kernel, int cin, double* din) {
    RBFOOD_DISPATCH(deconv2x_backward_input, dout, n, h, w, cout, kernel, cin, din);
}

void deconv2x_backward_params(const double* in, const double* dout, int n, int h, int w, int cin,
                              int cout, double* dkernel, double* dbias) {
    RBFOOD_DISPATCH(deconv2x_backward_params, in, dout, n, h, w, cin, cout, dkernel, dbias);
}

void dense_forward(const double* in, int rows, int din, const double* weight, const double* bias,
                   int dout, double* out) {
    RBFOOD_DISPATCH(dense_forward, in, rows, din, weight, bias, dout, out);
}

void dense_backward_input(const double* dout, int rows, int dout_dim, const double* weight,
                          int din, double* din_out) {
    RBFOOD_DISPATCH(dense_backward_input, dout, rows, dout_dim, weight, din, din_out);
}

void dense_backward_params(const double* in, const double* dout, int rows, int din, int dout_dim,
                           double* dweight, double* dbias) {
    RBFOOD_DISPATCH(dense_backward_params, in, dout, rows, din, dout_dim, dweight, dbias);
}

void rbf_forward(const double* feat, int n, int d, const double* centers, const double* weights,
                 int c, int k, double inv_two_sigma_sq, double* h, double* e_cache) {
    RBFOOD_DISPATCH(rbf_forward, feat, n, d, centers, weights, c, k, inv_two_sigma_sq, h,
                    e_cache);
}

void rbf_backward(const double* feat, int n, int d, const double* centers, const double* weights,
                  int c, int k, double inv_two_sigma_sq, const double* e_cache,
                  const double* upstream, double* dfeat, double* dcenters, double* dweights) {
    RBFOOD_DISPATCH(rbf_backward, feat, n, d, centers, weights, c, k, inv_two_sigma_sq, e_cache,
                    upstream, dfeat, dcenters, dweights);
}

#undef RBFOOD_DISPATCH

}  // namespace rbfood::kern
