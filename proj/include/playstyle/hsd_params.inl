// Template members of HsdParams. Included from hsd.hpp.

namespace playstyle {

namespace detail {

inline std::vector<std::uint32_t> dims_of(std::initializer_list<std::size_t> d) {
  std::vector<std::uint32_t> out;
  for (auto v : d) out.push_back(static_cast<std::uint32_t>(v));
  return out;
}

template <typename D, typename F>
void visit_dense(F& f, const char* name, Component c, D& d) {
  const std::string base(name);
  f(base + ".w", c, dims_of({d.out, d.in}), std::span(d.w));
  f(base + ".b", c, dims_of({d.out}), std::span(d.b));
}

template <typename P, typename F>
void visit_all(P& p, F& f) {
  visit_dense(f, "enc0.hidden", Component::kEnc0, p.enc0_hidden);
  visit_dense(f, "enc0.out", Component::kEnc0, p.enc0_out);
  f(std::string("embed0"), Component::kEmbed0, dims_of({p.embed0.entries, p.embed0.dim}), std::span(p.embed0.rows));
  visit_dense(f, "enc1.hidden", Component::kEnc1, p.enc1_hidden);
  visit_dense(f, "enc1.out", Component::kEnc1, p.enc1_out);
  f(std::string("embed1"), Component::kEmbed1, dims_of({p.embed1.entries, p.embed1.dim}), std::span(p.embed1.rows));
  visit_dense(f, "dec1.hidden", Component::kDec1, p.dec1_hidden);
  visit_dense(f, "dec1.out", Component::kDec1, p.dec1_out);
  visit_dense(f, "rec.hidden", Component::kRec, p.rec_hidden);
  visit_dense(f, "rec.out", Component::kRec, p.rec_out);
  visit_dense(f, "pi.hidden", Component::kPolicy, p.pi_hidden);
  visit_dense(f, "pi.out", Component::kPolicy, p.pi_out);
}

template <typename To, typename From>
DenseParams<To> cast_dense(const DenseParams<From>& d) {
  DenseParams<To> r;
  r.in = d.in;
  r.out = d.out;
  r.w.assign(d.w.begin(), d.w.end());
  r.b.assign(d.b.begin(), d.b.end());
  return r;
}

template <typename To, typename From>
CodebookParams<To> cast_codebook(const CodebookParams<From>& c) {
  CodebookParams<To> r;
  r.entries = c.entries;
  r.dim = c.dim;
  r.rows.assign(c.rows.begin(), c.rows.end());
  return r;
}

}  // namespace detail

template <typename Real>
template <typename F>
void HsdParams<Real>::for_each(F&& f) {
  detail::visit_all(*this, f);
}

template <typename Real>
template <typename F>
void HsdParams<Real>::for_each(F&& f) const {
  detail::visit_all(*this, f);
}

template <typename Real>
HsdParams<Real> HsdParams<Real>::zeros_like() const {
  HsdParams<Real> z = *this;
  z.for_each([](const std::string&, Component, const std::vector<std::uint32_t>&, std::span<Real> t) {
    std::fill(t.begin(), t.end(), Real(0));
  });
  z.version = 0;
  return z;
}

template <typename Real>
template <typename Other>
HsdParams<Other> HsdParams<Real>::cast() const {
  HsdParams<Other> r;
  r.enc0_hidden = detail::cast_dense<Other>(enc0_hidden);
  r.enc0_out = detail::cast_dense<Other>(enc0_out);
  r.embed0 = detail::cast_codebook<Other>(embed0);
  r.enc1_hidden = detail::cast_dense<Other>(enc1_hidden);
  r.enc1_out = detail::cast_dense<Other>(enc1_out);
  r.embed1 = detail::cast_codebook<Other>(embed1);
  r.dec1_hidden = detail::cast_dense<Other>(dec1_hidden);
  r.dec1_out = detail::cast_dense<Other>(dec1_out);
  r.rec_hidden = detail::cast_dense<Other>(rec_hidden);
  r.rec_out = detail::cast_dense<Other>(rec_out);
  r.pi_hidden = detail::cast_dense<Other>(pi_hidden);
  r.pi_out = detail::cast_dense<Other>(pi_out);
  r.version = version;
  return r;
}

template <typename Real>
bool HsdParams<Real>::operator==(const HsdParams& o) const {
  return enc0_hidden == o.enc0_hidden && enc0_out == o.enc0_out && embed0 == o.embed0 &&
         enc1_hidden == o.enc1_hidden && enc1_out == o.enc1_out && embed1 == o.embed1 &&
         dec1_hidden == o.dec1_hidden && dec1_out == o.dec1_out && rec_hidden == o.rec_hidden &&
         rec_out == o.rec_out && pi_hidden == o.pi_hidden && pi_out == o.pi_out;
}

}  // namespace playstyle
