#include "ptycho/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "ptycho/fft.hpp"

namespace ptycho::ad {

namespace {

using TensorPtr = std::shared_ptr<const ComplexTensor>;

TensorPtr own(ComplexTensor t) {
  return std::make_shared<const ComplexTensor>(std::move(t));
}

/// The tape shared by the tracked operands, or null if all are constants.
Tape* common_tape(std::initializer_list<const Variable*> vs) {
  Tape* tape = nullptr;
  for (const Variable* v : vs) {
    if (!v->requires_grad()) continue;
    if (tape && tape != v->tape()) {
      throw std::invalid_argument("operands recorded on different tapes");
    }
    tape = v->tape();
  }
  return tape;
}

Variable emit(Tape* tape, TensorPtr value, bool real_only,
              Tape::BackwardFn backward) {
  if (!tape) {
    return Variable::constant(ComplexTensor(*value), real_only);
  }
  const int id = tape->push_node(value, real_only, std::move(backward));
  return tape->wrap(id, std::move(value), real_only);
}

void require_real(const Variable& v, const char* op) {
  if (!v.real_only()) {
    throw std::invalid_argument(std::string(op) + ": input must be real-valued");
  }
}

/// Adjoint of broadcasting a scalar across `like`: reduce g back to 1x1.
ComplexTensor reduce_to_scalar(const ComplexTensor& g) {
  ComplexTensor out(1, 1);
  out.set(0, 0, g.sum());
  return out;
}

}  // namespace

Variable Variable::constant(ComplexTensor v, bool real_only) {
  Variable out;
  out.value_ = own(std::move(v));
  out.real_only_ = real_only;
  return out;
}

Variable Tape::leaf(ComplexTensor v, bool real_only) {
  if (consumed_) throw std::logic_error("leaf: tape already consumed");
  auto slot = std::make_shared<detail::LeafSlot>();
  slot->real_only = real_only;
  Node node;
  node.value = own(std::move(v));
  node.leaf = slot;
  node.real_only = real_only;
  nodes_.push_back(node);

  Variable out;
  out.value_ = nodes_.back().value;
  out.tape_ = this;
  out.node_ = static_cast<int>(nodes_.size()) - 1;
  out.real_only_ = real_only;
  out.leaf_ = std::move(slot);
  return out;
}

int Tape::push_node(TensorPtr value, bool real_only, BackwardFn backward) {
  if (consumed_) throw std::logic_error("push_node: tape already consumed");
  Node node;
  node.value = std::move(value);
  node.backward = std::move(backward);
  node.real_only = real_only;
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

Variable Tape::wrap(int node, TensorPtr value, bool real_only) {
  Variable out;
  out.value_ = std::move(value);
  out.tape_ = this;
  out.node_ = node;
  out.real_only_ = real_only;
  return out;
}

void Tape::accumulate_adjoint(int node, const ComplexTensor& g) {
  if (node < 0) return;
  auto& slot = adjoints_[node];
  if (!slot) {
    slot = g;
  } else {
    accumulate(*slot, g);
  }
}

const ComplexTensor& Tape::node_value(int node) const {
  return *nodes_.at(node).value;
}

void Tape::backward(const Variable& loss) {
  if (consumed_) throw std::logic_error("backward: tape already consumed");
  if (loss.tape() != this || loss.node() < 0) {
    throw std::invalid_argument("backward: loss was not recorded on this tape");
  }
  const ComplexTensor& lv = loss.value();
  if (!lv.is_scalar()) {
    throw std::invalid_argument("backward: loss must be a 1x1 scalar");
  }
  if (!loss.real_only() && std::abs(lv.im(0, 0)) > 1e-12) {
    throw std::invalid_argument("backward: loss must be real-valued");
  }
  consumed_ = true;

  adjoints_.assign(nodes_.size(), std::nullopt);
  adjoints_[loss.node()] = ComplexTensor::scalar(1.0);

  for (int id = loss.node(); id >= 0; --id) {
    if (!adjoints_[id]) continue;
    Node& node = nodes_[id];
    if (node.leaf) {
      ComplexTensor g = std::move(*adjoints_[id]);
      if (node.real_only) {
        for (double& v : g.im()) v = 0.0;
      }
      node.leaf->grad = std::move(g);
    } else if (node.backward) {
      node.backward(*this, *adjoints_[id]);
    }
    adjoints_[id].reset();
  }
  adjoints_.clear();
}

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

Variable add(const Variable& a, const Variable& b) {
  Tape* tape = common_tape({&a, &b});
  const bool a_scalar = a.value().is_scalar() && !b.value().is_scalar();
  const bool b_scalar = b.value().is_scalar() && !a.value().is_scalar();
  ComplexTensor out_t;
  if (a_scalar) {
    out_t = ComplexTensor::constant(b.value().rows(), b.value().cols(),
                                    a.value().at(0, 0)) + b.value();
  } else if (b_scalar) {
    out_t = a.value() + ComplexTensor::constant(a.value().rows(), a.value().cols(),
                                                b.value().at(0, 0));
  } else {
    out_t = a.value() + b.value();
  }
  const bool real_only = a.real_only() && b.real_only();
  const int ia = a.node(), ib = b.node();
  return emit(tape, own(std::move(out_t)), real_only,
              [ia, ib, a_scalar, b_scalar](Tape& t, const ComplexTensor& g) {
                if (ia >= 0) t.accumulate_adjoint(ia, a_scalar ? reduce_to_scalar(g) : g);
                if (ib >= 0) t.accumulate_adjoint(ib, b_scalar ? reduce_to_scalar(g) : g);
              });
}

Variable sub(const Variable& a, const Variable& b) {
  return add(a, scale(b, -1.0));
}

Variable mul(const Variable& a, const Variable& b) {
  Tape* tape = common_tape({&a, &b});
  const bool a_scalar = a.value().is_scalar() && !b.value().is_scalar();
  const bool b_scalar = b.value().is_scalar() && !a.value().is_scalar();
  ComplexTensor out_t;
  if (a_scalar) {
    out_t = scale(b.value(), a.value().at(0, 0));
  } else if (b_scalar) {
    out_t = scale(a.value(), b.value().at(0, 0));
  } else {
    out_t = a.value() * b.value();
  }
  const bool real_only = a.real_only() && b.real_only();
  const int ia = a.node(), ib = b.node();
  TensorPtr av = a.value_ptr(), bv = b.value_ptr();
  return emit(tape, own(std::move(out_t)), real_only,
              [ia, ib, a_scalar, b_scalar, av, bv](Tape& t, const ComplexTensor& g) {
                if (ia >= 0) {
                  ComplexTensor ga = b_scalar ? scale(g, std::conj(bv->at(0, 0)))
                                              : g * conjugate(*bv);
                  if (a_scalar) ga = reduce_to_scalar(ga);
                  t.accumulate_adjoint(ia, ga);
                }
                if (ib >= 0) {
                  ComplexTensor gb = a_scalar ? scale(g, std::conj(av->at(0, 0)))
                                              : g * conjugate(*av);
                  if (b_scalar) gb = reduce_to_scalar(gb);
                  t.accumulate_adjoint(ib, gb);
                }
              });
}

Variable scale(const Variable& a, std::complex<double> c) {
  Tape* tape = common_tape({&a});
  const bool real_only = a.real_only() && c.imag() == 0.0;
  const int ia = a.node();
  return emit(tape, own(scale(a.value(), c)), real_only,
              [ia, c](Tape& t, const ComplexTensor& g) {
                t.accumulate_adjoint(ia, scale(g, std::conj(c)));
              });
}

Variable add_scalar(const Variable& a, std::complex<double> c) {
  Tape* tape = common_tape({&a});
  ComplexTensor out_t = a.value();
  for (std::size_t i = 0; i < out_t.size(); ++i) {
    out_t.re()[i] += c.real();
    out_t.im()[i] += c.imag();
  }
  const bool real_only = a.real_only() && c.imag() == 0.0;
  const int ia = a.node();
  return emit(tape, own(std::move(out_t)), real_only,
              [ia](Tape& t, const ComplexTensor& g) { t.accumulate_adjoint(ia, g); });
}

Variable conj(const Variable& a) {
  Tape* tape = common_tape({&a});
  const int ia = a.node();
  return emit(tape, own(conjugate(a.value())), a.real_only(),
              [ia](Tape& t, const ComplexTensor& g) {
                t.accumulate_adjoint(ia, conjugate(g));
              });
}

Variable modulus_squared(const Variable& a) {
  Tape* tape = common_tape({&a});
  const int ia = a.node();
  TensorPtr av = a.value_ptr();
  return emit(tape, own(modulus_squared(a.value())), true,
              [ia, av](Tape& t, const ComplexTensor& g) {
                ComplexTensor ga(av->rows(), av->cols());
                for (std::size_t i = 0; i < ga.size(); ++i) {
                  const double c = 2.0 * g.re()[i];
                  ga.re()[i] = c * av->re()[i];
                  ga.im()[i] = c * av->im()[i];
                }
                t.accumulate_adjoint(ia, ga);
              });
}

Variable sqrt_positive(const Variable& a) {
  require_real(a, "sqrt_positive");
  Tape* tape = common_tape({&a});
  const int ia = a.node();
  TensorPtr av = a.value_ptr();
  TensorPtr out = own(sqrt_clamped(a.value()));
  return emit(tape, out, true, [ia, av, out](Tape& t, const ComplexTensor& g) {
    ComplexTensor ga(av->rows(), av->cols());
    for (std::size_t i = 0; i < ga.size(); ++i) {
      ga.re()[i] = av->re()[i] > 0.0 ? g.re()[i] / (2.0 * out->re()[i]) : 0.0;
    }
    t.accumulate_adjoint(ia, ga);
  });
}

Variable relu(const Variable& a) {
  require_real(a, "relu");
  Tape* tape = common_tape({&a});
  const int ia = a.node();
  TensorPtr av = a.value_ptr();
  ComplexTensor out_t(a.value().rows(), a.value().cols());
  for (std::size_t i = 0; i < out_t.size(); ++i) {
    out_t.re()[i] = std::max(0.0, a.value().re()[i]);
  }
  return emit(tape, own(std::move(out_t)), true,
              [ia, av](Tape& t, const ComplexTensor& g) {
                ComplexTensor ga(av->rows(), av->cols());
                for (std::size_t i = 0; i < ga.size(); ++i) {
                  ga.re()[i] = av->re()[i] > 0.0 ? g.re()[i] : 0.0;
                }
                t.accumulate_adjoint(ia, ga);
              });
}

Variable abs_real(const Variable& a) {
  require_real(a, "abs_real");
  Tape* tape = common_tape({&a});
  const int ia = a.node();
  TensorPtr av = a.value_ptr();
  ComplexTensor out_t(a.value().rows(), a.value().cols());
  for (std::size_t i = 0; i < out_t.size(); ++i) {
    out_t.re()[i] = std::abs(a.value().re()[i]);
  }
  return emit(tape, own(std::move(out_t)), true,
              [ia, av](Tape& t, const ComplexTensor& g) {
                ComplexTensor ga(av->rows(), av->cols());
                for (std::size_t i = 0; i < ga.size(); ++i) {
                  const double x = av->re()[i];
                  ga.re()[i] = x > 0.0 ? g.re()[i] : (x < 0.0 ? -g.re()[i] : 0.0);
                }
                t.accumulate_adjoint(ia, ga);
              });
}

Variable sum(const Variable& a) {
  Tape* tape = common_tape({&a});
  const int ia = a.node();
  const int rows = a.value().rows(), cols = a.value().cols();
  ComplexTensor out_t(1, 1);
  out_t.set(0, 0, a.value().sum());
  return emit(tape, own(std::move(out_t)), a.real_only(),
              [ia, rows, cols](Tape& t, const ComplexTensor& g) {
                t.accumulate_adjoint(
                    ia, ComplexTensor::constant(rows, cols, g.at(0, 0)));
              });
}

Variable fft2(const Variable& a) {
  Tape* tape = common_tape({&a});
  const int ia = a.node();
  return emit(tape, own(fft2_raw(a.value())), false,
              [ia](Tape& t, const ComplexTensor& g) {
                t.accumulate_adjoint(ia, ifft2_raw(g));
              });
}

Variable ifft2(const Variable& a) {
  Tape* tape = common_tape({&a});
  const int ia = a.node();
  return emit(tape, own(ifft2_raw(a.value())), false,
              [ia](Tape& t, const ComplexTensor& g) {
                t.accumulate_adjoint(ia, fft2_raw(g));
              });
}

Variable exp_imag(const Variable& theta) {
  require_real(theta, "exp_imag");
  Tape* tape = common_tape({&theta});
  const int ia = theta.node();
  TensorPtr out = own(exp_imag(theta.value()));
  return emit(tape, out, false, [ia, out](Tape& t, const ComplexTensor& g) {
    ComplexTensor ga(out->rows(), out->cols());
    for (std::size_t i = 0; i < ga.size(); ++i) {
      ga.re()[i] = -g.re()[i] * out->im()[i] + g.im()[i] * out->re()[i];
    }
    t.accumulate_adjoint(ia, ga);
  });
}

Variable pad_center(const Variable& a, int pad_rows, int pad_cols) {
  Tape* tape = common_tape({&a});
  const int ia = a.node();
  const int rows = a.value().rows(), cols = a.value().cols();
  return emit(tape, own(pad_center(a.value(), pad_rows, pad_cols)),
              a.real_only(),
              [ia, rows, cols](Tape& t, const ComplexTensor& g) {
                t.accumulate_adjoint(ia, crop_center(g, rows, cols));
              });
}

Variable crop_center(const Variable& a, int rows, int cols) {
  Tape* tape = common_tape({&a});
  const int ia = a.node();
  const int in_rows = a.value().rows(), in_cols = a.value().cols();
  const int off_r = (in_rows - rows) / 2, off_c = (in_cols - cols) / 2;
  return emit(tape, own(crop_center(a.value(), rows, cols)), a.real_only(),
              [ia, in_rows, in_cols, off_r, off_c](Tape& t,
                                                   const ComplexTensor& g) {
                ComplexTensor ga(in_rows, in_cols);
                for (int r = 0; r < g.rows(); ++r) {
                  for (int c = 0; c < g.cols(); ++c) {
                    ga.re(r + off_r, c + off_c) = g.re(r, c);
                    ga.im(r + off_r, c + off_c) = g.im(r, c);
                  }
                }
                t.accumulate_adjoint(ia, ga);
              });
}

Variable stack_rows(const std::vector<Variable>& parts) {
  if (parts.empty()) throw std::invalid_argument("stack_rows: empty input");
  std::vector<const Variable*> ptrs;
  for (const Variable& p : parts) ptrs.push_back(&p);
  Tape* tape = nullptr;
  for (const Variable* p : ptrs) {
    Tape* t = common_tape({p});
    if (t) {
      if (tape && tape != t) {
        throw std::invalid_argument("stack_rows: operands on different tapes");
      }
      tape = t;
    }
  }
  const int cols = parts[0].value().cols();
  int total_rows = 0;
  bool real_only = true;
  for (const Variable& p : parts) {
    if (p.value().cols() != cols) {
      throw std::invalid_argument("stack_rows: column count mismatch");
    }
    total_rows += p.value().rows();
    real_only = real_only && p.real_only();
  }
  ComplexTensor out_t(total_rows, cols);
  std::vector<int> ids, offsets, row_counts;
  int off = 0;
  for (const Variable& p : parts) {
    const ComplexTensor& v = p.value();
    for (int r = 0; r < v.rows(); ++r) {
      for (int c = 0; c < cols; ++c) {
        out_t.re(off + r, c) = v.re(r, c);
        out_t.im(off + r, c) = v.im(r, c);
      }
    }
    ids.push_back(p.node());
    offsets.push_back(off);
    row_counts.push_back(v.rows());
    off += v.rows();
  }
  return emit(tape, own(std::move(out_t)), real_only,
              [ids, offsets, row_counts, cols](Tape& t, const ComplexTensor& g) {
                for (std::size_t k = 0; k < ids.size(); ++k) {
                  if (ids[k] < 0) continue;
                  ComplexTensor gk(row_counts[k], cols);
                  for (int r = 0; r < row_counts[k]; ++r) {
                    for (int c = 0; c < cols; ++c) {
                      gk.re(r, c) = g.re(offsets[k] + r, c);
                      gk.im(r, c) = g.im(offsets[k] + r, c);
                    }
                  }
                  t.accumulate_adjoint(ids[k], gk);
                }
              });
}

Variable scalar_times_plane(const Variable& s, const ComplexTensor& plane) {
  require_real(s, "scalar_times_plane");
  if (!s.value().is_scalar()) {
    throw std::invalid_argument("scalar_times_plane: s must be 1x1");
  }
  Tape* tape = common_tape({&s});
  const int is = s.node();
  auto plane_ptr = own(plane);
  ComplexTensor out_t = scale(plane, s.value().re(0, 0));
  bool plane_real = true;
  for (double v : plane.im()) {
    if (v != 0.0) { plane_real = false; break; }
  }
  return emit(tape, own(std::move(out_t)), plane_real,
              [is, plane_ptr](Tape& t, const ComplexTensor& g) {
                double acc = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i) {
                  acc += g.re()[i] * plane_ptr->re()[i] +
                         g.im()[i] * plane_ptr->im()[i];
                }
                t.accumulate_adjoint(is, ComplexTensor::scalar(acc));
              });
}

Variable mul_plane(const Variable& a, const ComplexTensor& plane) {
  if (!a.value().same_shape(plane)) {
    throw std::invalid_argument("mul_plane: shape mismatch");
  }
  Tape* tape = common_tape({&a});
  const int ia = a.node();
  auto plane_ptr = own(plane);
  return emit(tape, own(a.value() * plane), false,
              [ia, plane_ptr](Tape& t, const ComplexTensor& g) {
                t.accumulate_adjoint(ia, g * conjugate(*plane_ptr));
              });
}

}  // namespace ptycho::ad
