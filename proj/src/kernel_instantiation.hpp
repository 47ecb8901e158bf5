#pragma once

// Explicit instantiations shared by the GEMM and serial kernel sets.
#define JAMLOC_INSTANTIATE_KERNELS(T)                                                         \
  template void conv1d_forward<T>(const ConvGeometry&, std::span<const T>, std::span<const T>, \
                                  std::span<const T>, std::span<T>);                          \
  template void conv1d_backward<T>(const ConvGeometry&, std::span<const T>,                   \
                                   std::span<const T>, std::span<const T>, std::span<T>,      \
                                   std::span<T>, std::span<T>);                               \
  template void conv_transpose1d_forward<T>(const ConvGeometry&, std::span<const T>,          \
                                            std::span<const T>, std::span<const T>,           \
                                            std::span<T>);                                    \
  template void conv_transpose1d_backward<T>(const ConvGeometry&, std::span<const T>,         \
                                             std::span<const T>, std::span<const T>,          \
                                             std::span<T>, std::span<T>, std::span<T>);       \
  template void depthwise_forward<T>(int, int, int, int, int, std::span<const T>,             \
                                     std::span<const T>, std::span<const T>, std::span<T>);   \
  template void depthwise_backward<T>(int, int, int, int, int, std::span<const T>,            \
                                      std::span<const T>, std::span<const T>, std::span<T>,   \
                                      std::span<T>, std::span<T>);                            \
  template void layernorm_forward<T>(int, int, T, std::span<const T>, std::span<const T>,     \
                                     std::span<const T>, std::span<T>, std::span<T>,          \
                                     std::span<T>);                                           \
  template void layernorm_backward<T>(int, int, std::span<const T>, std::span<const T>,       \
                                      std::span<const T>, std::span<const T>, std::span<T>,   \
                                      std::span<T>, std::span<T>);                            \
  template void linear_forward<T>(int, int, int, std::span<const T>, std::span<const T>,      \
                                  std::span<const T>, std::span<T>);                          \
  template void linear_backward<T>(int, int, int, std::span<const T>, std::span<const T>,     \
                                   std::span<const T>, std::span<T>, std::span<T>,            \
                                   std::span<T>);                                             \
  template void gelu_forward<T>(std::span<const T>, std::span<T>);                            \
  template void gelu_backward<T>(std::span<const T>, std::span<const T>, std::span<T>);
