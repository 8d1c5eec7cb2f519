#include "phstab/spec_loader.hpp"

#include "phstab/error.hpp"

#include <toml.hpp>

#include <fstream>
#include <optional>
#include <sstream>

namespace phstab {

namespace {

class Collector {
 public:
  void add(const toml::node* where, const std::string& msg) {
    if (where != nullptr && where->source().begin.line > 0) {
      errors_.push_back("line " + std::to_string(where->source().begin.line) + ": " + msg);
    } else {
      errors_.push_back(msg);
    }
  }
  void add(const std::string& msg) { errors_.push_back(msg); }
  std::vector<std::string>& errors() { return errors_; }

 private:
  std::vector<std::string> errors_;
};

std::optional<double> number(const toml::node& n) {
  if (n.is_floating_point()) return n.as_floating_point()->get();
  if (n.is_integer()) return static_cast<double>(n.as_integer()->get());
  return std::nullopt;
}

std::optional<std::vector<double>> read_vector(const toml::node* node, const std::string& key,
                                               Collector& errs) {
  const auto* arr = node ? node->as_array() : nullptr;
  if (arr == nullptr) {
    errs.add(node, key + " must be an array of numbers");
    return std::nullopt;
  }
  std::vector<double> out;
  for (const auto& el : *arr) {
    const auto v = number(el);
    if (!v) {
      errs.add(&el, key + " contains a non-numeric entry");
      return std::nullopt;
    }
    out.push_back(*v);
  }
  return out;
}

std::optional<Matrix> read_matrix(const toml::node* node, const std::string& key, Collector& errs) {
  const auto* arr = node ? node->as_array() : nullptr;
  if (arr == nullptr || arr->empty()) {
    errs.add(node, key + " must be a non-empty array of rows");
    return std::nullopt;
  }
  std::vector<std::vector<double>> rows;
  for (const auto& row : *arr) {
    auto r = read_vector(&row, key + " row", errs);
    if (!r) return std::nullopt;
    rows.push_back(std::move(*r));
  }
  const std::size_t cols = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != cols || cols == 0) {
      errs.add(node, key + " rows must be non-empty and of equal length");
      return std::nullopt;
    }
  }
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  return m;
}

template <typename T>
std::optional<T> read_scalar(const toml::table& tbl, const std::string& section, const std::string& key,
                             Collector& errs) {
  const toml::node* n = tbl.get(key);
  if (n == nullptr) return std::nullopt;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = number(*n)) return v;
    errs.add(n, section + "." + key + " must be a number");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (n->is_string()) return n->as_string()->get();
    errs.add(n, section + "." + key + " must be a string");
  } else {
    if (n->is_integer()) return static_cast<T>(n->as_integer()->get());
    errs.add(n, section + "." + key + " must be an integer");
  }
  return std::nullopt;
}

const toml::table* section(const toml::table& root, const std::string& name, Collector& errs,
                           bool required) {
  const toml::node* n = root.get(name);
  if (n == nullptr) {
    if (required) errs.add("missing section [" + name + "]");
    return nullptr;
  }
  if (!n->is_table()) {
    errs.add(n, name + " must be a table");
    return nullptr;
  }
  return n->as_table();
}

std::optional<HamiltonianDensity> read_hamiltonian(const toml::table* tbl, double a, double b,
                                                   const std::filesystem::path& base_dir,
                                                   Collector& errs) {
  if (tbl == nullptr) return std::nullopt;
  const auto type = read_scalar<std::string>(*tbl, "hamiltonian", "type", errs);
  if (!type) {
    errs.add(tbl, "hamiltonian.type is required (constant, scalar, piecewise or csv)");
    return std::nullopt;
  }
  try {
    if (*type == "constant") {
      auto m = read_matrix(tbl->get("matrix"), "hamiltonian.matrix", errs);
      if (!m) return std::nullopt;
      return HamiltonianDensity::constant(a, b, *m);
    }
    if (*type == "scalar") {
      auto xs = read_vector(tbl->get("breakpoints"), "hamiltonian.breakpoints", errs);
      auto vs = read_vector(tbl->get("values"), "hamiltonian.values", errs);
      const auto dim = read_scalar<int>(*tbl, "hamiltonian", "dim", errs);
      if (!xs || !vs) return std::nullopt;
      return HamiltonianDensity::scalar(*xs, *vs, dim.value_or(1));
    }
    if (*type == "piecewise") {
      auto xs = read_vector(tbl->get("breakpoints"), "hamiltonian.breakpoints", errs);
      const auto* arr = tbl->get_as<toml::array>("matrices");
      if (arr == nullptr) {
        errs.add(tbl, "hamiltonian.matrices must be an array of matrices");
        return std::nullopt;
      }
      std::vector<Matrix> pieces;
      for (const auto& el : *arr) {
        auto m = read_matrix(&el, "hamiltonian.matrices[" + std::to_string(pieces.size()) + "]", errs);
        if (!m) return std::nullopt;
        pieces.push_back(std::move(*m));
      }
      if (!xs) return std::nullopt;
      return HamiltonianDensity::piecewise(*xs, std::move(pieces));
    }
    if (*type == "csv") {
      const auto path = read_scalar<std::string>(*tbl, "hamiltonian", "path", errs);
      if (!path) {
        errs.add(tbl, "hamiltonian.path is required for type csv");
        return std::nullopt;
      }
      std::filesystem::path p(*path);
      if (p.is_relative()) p = base_dir / p;
      return load_density_csv(p);
    }
    errs.add(tbl->get("type"), "unknown hamiltonian.type '" + *type + "'");
  } catch (const Error& e) {
    errs.add(tbl, std::string("hamiltonian: ") + e.what());
  }
  return std::nullopt;
}

std::optional<BoundarySpec> read_boundary(const toml::table* tbl, Collector& errs) {
  if (tbl == nullptr) return std::nullopt;
  const auto form = read_scalar<std::string>(*tbl, "boundary", "form", errs).value_or("W");
  if (form == "W") {
    auto w = read_matrix(tbl->get("W"), "boundary.W", errs);
    if (!w) return std::nullopt;
    return WForm{*w};
  }
  if (form == "MK") {
    auto m = read_matrix(tbl->get("M"), "boundary.M", errs);
    std::optional<Matrix> k;
    if (tbl->contains("K")) {
      k = read_matrix(tbl->get("K"), "boundary.K", errs);
      if (!k) return std::nullopt;
    }
    if (!m) return std::nullopt;
    return MKForm{*m, k};
  }
  errs.add(tbl->get("form"), "boundary.form must be \"W\" or \"MK\", got '" + form + "'");
  return std::nullopt;
}

toml::array to_array(const Matrix& m) {
  toml::array rows;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    toml::array row;
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j) + 0.0);  // no negative zeros
    rows.push_back(std::move(row));
  }
  return rows;
}

toml::array to_array(const std::vector<double>& v) {
  toml::array out;
  for (double x : v) out.push_back(x);
  return out;
}

}  // namespace

ProblemSpec parse_spec(std::string_view text, const std::filesystem::path& base_dir,
                       std::string_view source_name) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source_name << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
       << e.description();
    throw Error(ErrorCode::ParseError, os.str());
  }

  Collector errs;
  ProblemSpec spec;
  spec.name = read_scalar<std::string>(root, "", "name", errs).value_or(std::string(source_name));

  double a = 0.0;
  double b = 1.0;
  bool have_interval = false;
  if (const toml::node* iv = root.get("interval")) {
    auto v = read_vector(iv, "interval", errs);
    if (v && v->size() == 2) {
      a = (*v)[0];
      b = (*v)[1];
      have_interval = true;
      if (!(a < b)) errs.add(iv, "interval must satisfy a < b");
    } else if (v) {
      errs.add(iv, "interval must have exactly two entries [a, b]");
    }
  }

  const auto* p1_tbl = section(root, "p1", errs, true);
  std::optional<Matrix> p1;
  if (p1_tbl) p1 = read_matrix(p1_tbl->get("matrix"), "p1.matrix", errs);

  std::optional<Matrix> p0;
  if (const auto* p0_tbl = section(root, "p0", errs, false)) {
    p0 = read_matrix(p0_tbl->get("matrix"), "p0.matrix", errs);
  }

  const auto* h_tbl = section(root, "hamiltonian", errs, true);
  const std::string h_type =
      h_tbl ? read_scalar<std::string>(*h_tbl, "hamiltonian", "type", errs).value_or("") : "";
  if (h_type == "constant" && !have_interval) errs.add("interval = [a, b] is required for a constant hamiltonian");
  const bool can_build = h_type != "constant" || (have_interval && a < b);
  auto h = can_build ? read_hamiltonian(h_tbl, a, b, base_dir, errs) : std::nullopt;
  if (h && have_interval &&
      (std::abs(h->a() - a) > 1e-9 * (b - a) || std::abs(h->b() - b) > 1e-9 * (b - a))) {
    std::ostringstream os;
    os << "hamiltonian covers [" << h->a() << ", " << h->b() << "] but interval is [" << a << ", " << b << "]";
    errs.add(h_tbl, os.str());
  }

  auto boundary = read_boundary(section(root, "boundary", errs, true), errs);

  if (const auto* sw = section(root, "sweep", errs, false)) {
    spec.sweep.t_max = read_scalar<double>(*sw, "sweep", "t_max", errs);
    spec.sweep.n_samples = read_scalar<int>(*sw, "sweep", "n_samples", errs).value_or(spec.sweep.n_samples);
    spec.sweep.doubling_rounds =
        read_scalar<int>(*sw, "sweep", "doubling_rounds", errs).value_or(spec.sweep.doubling_rounds);
    spec.sweep.evidence_drop =
        read_scalar<double>(*sw, "sweep", "evidence_drop", errs).value_or(spec.sweep.evidence_drop);
  }
  if (const auto* sim = section(root, "sim", errs, false)) {
    SimParams s;
    s.n_cells = read_scalar<int>(*sim, "sim", "n_cells", errs).value_or(s.n_cells);
    s.t_final = read_scalar<double>(*sim, "sim", "t_final", errs).value_or(s.t_final);
    s.dt = read_scalar<double>(*sim, "sim", "dt", errs).value_or(s.dt);
    spec.sim = s;
  }

  if (p1 && h && boundary) {
    spec.p1 = *p1;
    spec.p0 = p0 ? *p0 : Matrix::Zero(p1->rows(), p1->rows());
    spec.hamiltonian = *h;
    spec.boundary = *boundary;
    for (auto& e : validate(spec)) errs.add(e);
  }
  if (!errs.errors().empty()) {
    const std::string message = std::string(source_name) + ": " + std::to_string(errs.errors().size()) +
                                " problem(s): " + errs.errors().front();
    throw Error(ErrorCode::ValidationError, message, std::move(errs.errors()));
  }
  return spec;
}

ProblemSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str(), path.parent_path().empty() ? "." : path.parent_path(), path.string());
}

std::string to_toml(const ProblemSpec& spec) {
  toml::table root;
  root.insert("name", spec.name);
  root.insert("interval", toml::array{spec.a(), spec.b()});
  root.insert("p1", toml::table{{"matrix", to_array(spec.p1)}});
  if (spec.p0.size() > 0 && spec.p0.norm() > 0.0) {
    root.insert("p0", toml::table{{"matrix", to_array(spec.p0)}});
  }

  const auto& h = spec.hamiltonian;
  toml::table ht;
  if (h.num_pieces() == 1) {
    ht.insert("type", "constant");
    ht.insert("matrix", to_array(h.piece(0)));
  } else if (h.is_scalar()) {
    std::vector<double> values;
    for (std::size_t j = 0; j < h.num_pieces(); ++j) values.push_back(h.piece(j)(0, 0));
    ht.insert("type", "scalar");
    ht.insert("dim", h.dim());
    ht.insert("breakpoints", to_array(h.breakpoints()));
    ht.insert("values", to_array(values));
  } else {
    toml::array mats;
    for (std::size_t j = 0; j < h.num_pieces(); ++j) mats.push_back(to_array(h.piece(j)));
    ht.insert("type", "piecewise");
    ht.insert("breakpoints", to_array(h.breakpoints()));
    ht.insert("matrices", std::move(mats));
  }
  root.insert("hamiltonian", std::move(ht));

  toml::table bt;
  if (const auto* wf = std::get_if<WForm>(&spec.boundary)) {
    bt.insert("form", "W");
    bt.insert("W", to_array(wf->w));
  } else {
    const auto& mk = std::get<MKForm>(spec.boundary);
    bt.insert("form", "MK");
    bt.insert("M", to_array(mk.m));
    if (mk.k) bt.insert("K", to_array(*mk.k));
  }
  root.insert("boundary", std::move(bt));

  toml::table st;
  if (spec.sweep.t_max) st.insert("t_max", *spec.sweep.t_max);
  st.insert("n_samples", spec.sweep.n_samples);
  st.insert("doubling_rounds", spec.sweep.doubling_rounds);
  st.insert("evidence_drop", spec.sweep.evidence_drop);
  root.insert("sweep", std::move(st));

  if (spec.sim) {
    root.insert("sim", toml::table{{"n_cells", spec.sim->n_cells},
                                   {"t_final", spec.sim->t_final},
                                   {"dt", spec.sim->dt}});
  }
  std::ostringstream os;
  os << root << '\n';
  return os.str();
}

}  // namespace phstab
