#pragma once

namespace certbound {

// Density of the symmetric alpha-stable law with characteristic function
// exp(-|sigma t|^alpha), 0 < alpha <= 2. Relative accuracy about 1e-8.
double sas_density(double alpha, double sigma, double z);

// Direct Fourier inversion with one Gauss-Kronrod panel per half period.
// Loses relative accuracy where the density is far below its peak.
double sas_density_fourier(double alpha, double sigma, double z);

}  // namespace certbound
