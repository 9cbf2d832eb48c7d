#pragma once

// Hot compute kernels, each in two builds: a straightforward serial reference
// and an OpenMP-parallel version. The parallel versions assign every output
// element to exactly one loop iteration, so results do not depend on the
// thread count. The serial reference is kept for testing and benchmarking;
// kern::set_backend switches between them at runtime.
//
// Layouts: activations are NHWC (channel fastest), conv kernels are
// (kh, kw, cin, cout), dense weights are (din, dout).

namespace rbfood::kern {

enum class Backend { Serial, Parallel };

Backend backend();
void set_backend(Backend b);

// ---- 3x3 convolution, stride 1, zero padding 1 ----
void conv3x3_forward(const double* in, int n, int h, int w, int cin,
                     const double* kernel, const double* bias, int cout, double* out);
void conv3x3_backward_input(const double* dout, int n, int h, int w, int cout,
                            const double* kernel, int cin, double* din);
void conv3x3_backward_params(const double* in, const double* dout, int n, int h, int w,
                             int cin, int cout, double* dkernel, double* dbias);

// ---- 2x2 transposed convolution, stride 2 (doubles spatial size) ----
void deconv2x_forward(const double* in, int n, int h, int w, int cin,
                      const double* kernel, const double* bias, int cout, double* out);
void deconv2x_backward_input(const double* dout, int n, int h, int w, int cout,
                             const double* kernel, int cin, double* din);
void deconv2x_backward_params(const double* in, const double* dout, int n, int h, int w,
                              int cin, int cout, double* dkernel, double* dbias);

// ---- dense (last-axis contraction): out[r,:] = in[r,:] * W + b ----
void dense_forward(const double* in, int rows, int din,
                   const double* weight, const double* bias, int dout, double* out);
void dense_backward_input(const double* dout, int rows, int dout_dim,
                          const double* weight, int din, double* din_out);
void dense_backward_params(const double* in, const double* dout, int rows, int din,
                           int dout_dim, double* dweight, double* dbias);

// ---- per-sample Gaussian kernel scores against per-class centers ----
// feat (n,d), centers (c,k,d), weights (c,k) already normalized per class.
// h[i,cc] = sum_k weights[cc,k] * exp(-|feat_i - centers_cc_k|^2 * inv_two_sigma_sq).
// e_cache (n,c,k) receives the per-center kernel values when non-null.
void rbf_forward(const double* feat, int n, int d, const double* centers,
                 const double* weights, int c, int k, double inv_two_sigma_sq,
                 double* h, double* e_cache);

// Gradients of sum_i sum_cc upstream[i,cc] * h[i,cc].
// dweights is with respect to the normalized weights (softmax chain applied
// by the caller). Any of dfeat/dcenters/dweights may be null to skip.
void rbf_backward(const double* feat, int n, int d, const double* centers,
                  const double* weights, int c, int k, double inv_two_sigma_sq,
                  const double* e_cache, const double* upstream,
                  double* dfeat, double* dcenters, double* dweights);

}  // namespace rbfood::kern
