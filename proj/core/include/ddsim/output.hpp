#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ddsim/linear_solver.hpp"
#include "ddsim/transient.hpp"

namespace ddsim {

/// Full-precision scientific notation used by every table.
std::string format_number(double value);

/// Writes one CSV row; fields are written as given.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

/// Time-series table: one row per accepted state.
///   t, dt, gummel_iterations, proxy, balance_n, balance_p,
///   then I_<contact>, bias_<contact> per contact.
/// Currents are electric currents into the device.
class TimeSeriesTable {
 public:
  explicit TimeSeriesTable(const Simulation& sim);
  std::vector<std::string> header() const;
  void record(const StepEvent& event);
  void write(std::ostream& out) const;
  const std::vector<std::vector<double>>& rows() const { return rows_; }

 private:
  const Simulation* sim_;
  std::vector<std::vector<double>> rows_;
};

/// Field snapshot: x[, y], phi, Phi_n, Phi_p, u_n, u_p per cell.
void write_fields(std::ostream& out, const Simulation& sim, const CarrierState& state);

/// Human-readable blow-up report with the sampled norm history.
void write_blowup_report(std::ostream& out, const BlowUpReport& report);

/// Matrix Market coordinate format, general real.
void write_matrix_market(std::ostream& out, const SparseMatrix& matrix);

}  // namespace ddsim
