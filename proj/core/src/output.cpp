#include "ddsim/output.hpp"

#include <cstdio>
#include <ostream>

namespace ddsim {

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", value);
  return buf;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    out << fields[i];
  }
  out << '\n';
}

TimeSeriesTable::TimeSeriesTable(const Simulation& sim) : sim_(&sim) {}

std::vector<std::string> TimeSeriesTable::header() const {
  std::vector<std::string> h{"t", "dt", "gummel_iterations", "proxy", "balance_n", "balance_p"};
  for (const auto& c : sim_->spec().boundary.contacts) {
    h.push_back("I_" + c.name);
    h.push_back("bias_" + c.name);
  }
  return h;
}

void TimeSeriesTable::record(const StepEvent& event) {
  std::vector<double> row{event.state.t};
  if (event.record) {
    row.push_back(event.record->dt);
    row.push_back(event.record->gummel_iterations);
  } else {
    row.push_back(0.0);
    row.push_back(0.0);
  }
  row.push_back(event.proxy);
  for (int k = 0; k < 2; ++k) {
    row.push_back(event.balance ? event.balance->residual[k] / event.balance->scale[k] : 0.0);
  }
  const auto flux = event.record ? event.record->face_flux : compute_currents(*sim_, event.state).flux;
  const auto& contacts = sim_->spec().boundary.contacts;
  for (std::size_t c = 0; c < contacts.size(); ++c) {
    row.push_back(terminal_current(*sim_, flux, static_cast<int>(c)));
    const auto& contact = contacts[c];
    row.push_back(contact.ohmic ? contact.bias.at(event.state.t)
                                : contact.Phi2_at(event.state.t));
  }
  rows_.push_back(std::move(row));
}

void TimeSeriesTable::write(std::ostream& out) const {
  write_csv_row(out, header());
  for (const auto& row : rows_) {
    std::vector<std::string> fields;
    fields.reserve(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      fields.push_back(i == 2 ? std::to_string(static_cast<long>(row[i])) : format_number(row[i]));
    }
    write_csv_row(out, fields);
  }
}

void write_fields(std::ostream& out, const Simulation& sim, const CarrierState& state) {
  const auto& mesh = sim.mesh();
  std::vector<std::string> header{"x"};
  if (mesh.dimension == 2) header.push_back("y");
  for (const char* name : {"phi", "Phi_n", "Phi_p", "u_n", "u_p"}) header.emplace_back(name);
  write_csv_row(out, header);
  for (int i = 0; i < mesh.cell_count(); ++i) {
    std::vector<std::string> row{format_number(mesh.cells[i].center[0])};
    if (mesh.dimension == 2) row.push_back(format_number(mesh.cells[i].center[1]));
    for (double v : {state.phi[i], state.Phi1[i], state.Phi2[i], state.u1[i], state.u2[i]}) {
      row.push_back(format_number(v));
    }
    write_csv_row(out, row);
  }
}

void write_blowup_report(std::ostream& out, const BlowUpReport& report) {
  out << "detected: " << (report.detected ? "true" : "false") << '\n';
  out << "reason: " << report.reason << '\n';
  out << "t_star: " << format_number(report.t_star) << '\n';
  out << "history:\n";
  write_csv_row(out, {"t", "proxy"});
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    write_csv_row(out, {format_number(report.times[i]), format_number(report.norms[i])});
  }
}

void write_matrix_market(std::ostream& out, const SparseMatrix& matrix) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
  for (int j = 0; j < matrix.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(matrix, j); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << format_number(it.value()) << '\n';
    }
  }
}

}  // namespace ddsim
