#include "jamloc/optim.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace jamloc::nn {

template <typename T>
int Adam<T>::add_group(const ParamList<T>& params, double lr) {
  Group g{{}, lr};
  for (auto* p : params) g.slots.push_back({p, std::vector<T>(p->size()), std::vector<T>(p->size())});
  groups_.push_back(std::move(g));
  return static_cast<int>(groups_.size()) - 1;
}

template <typename T>
void Adam<T>::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  const T b1 = static_cast<T>(opts_.beta1), b2 = static_cast<T>(opts_.beta2);
  for (auto& g : groups_) {
    const T step_size = static_cast<T>(g.lr / bc1);
    const T inv_bc2 = static_cast<T>(1.0 / bc2);
    const T eps = static_cast<T>(opts_.eps);
    const T wd = static_cast<T>(opts_.weight_decay);
    for (auto& s : g.slots) {
      Param<T>& p = *s.param;
      if (!p.trainable) continue;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const T grad = p.grad[i] + wd * p.value[i];
        s.m[i] = b1 * s.m[i] + (T(1) - b1) * grad;
        s.v[i] = b2 * s.v[i] + (T(1) - b2) * grad * grad;
        p.value[i] -= step_size * s.m[i] / (std::sqrt(s.v[i] * inv_bc2) + eps);
      }
    }
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& g : groups_)
    for (auto& s : g.slots) s.param->zero_grad();
}

template <typename T>
std::vector<typename Adam<T>::Moments> Adam<T>::export_state() const {
  std::vector<Moments> out;
  for (const auto& g : groups_)
    for (const auto& s : g.slots) out.push_back({s.param->name, s.m, s.v});
  return out;
}

template <typename T>
void Adam<T>::import_state(long steps, const std::vector<Moments>& state) {
  std::map<std::string, const Moments*> by_name;
  for (const auto& m : state) by_name[m.name] = &m;
  for (auto& g : groups_)
    for (auto& s : g.slots) {
      auto it = by_name.find(s.param->name);
      if (it == by_name.end()) continue;
      if (it->second->m.size() != s.m.size())
        throw std::runtime_error("optimizer state size mismatch for " + s.param->name);
      s.m = it->second->m;
      s.v = it->second->v;
    }
  t_ = steps;
}

template class Adam<float>;
template class Adam<double>;

}  // namespace jamloc::nn
