#pragma once

#include <string>
#include <vector>

#include "jamloc/layers.hpp"

namespace jamloc::nn {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Adam with parameter groups that each carry their own learning rate.
// Parameters whose `trainable` flag is off are left untouched.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamOptions opts = {}) : opts_(opts) {}

  int add_group(const ParamList<T>& params, double lr);
  void set_lr(int group, double lr) { groups_.at(group).lr = lr; }
  double lr(int group) const { return groups_.at(group).lr; }
  std::size_t num_groups() const { return groups_.size(); }
  long steps() const { return t_; }

  void step();
  void zero_grad();

  // Moment buffers keyed by parameter name, for checkpoints.
  struct Moments {
    std::string name;
    std::vector<T> m, v;
  };
  std::vector<Moments> export_state() const;
  void import_state(long steps, const std::vector<Moments>& state);

 private:
  struct Slot {
    Param<T>* param;
    std::vector<T> m, v;
  };
  struct Group {
    std::vector<Slot> slots;
    double lr;
  };
  AdamOptions opts_;
  std::vector<Group> groups_;
  long t_ = 0;
};

}  // namespace jamloc::nn
