"""Reference solver: 2D periodic pseudospectral Euler on the doubled domain.

The half-plane flow (U(y) + u', v') with wall at y = 0 is extended to
y in [-Ly, Ly) with odd perturbation vorticity, which keeps v' = 0 on y = 0.
The perturbation vorticity w' obeys

    w'_t + (U + u') w'_x + v' (w'_y - U'') = 0,

where U and U'' enter only pointwise.  Explicit RK4 in time, 2/3-rule
dealiasing, fully independent of the package.
"""
import numpy as np


class MirrorEuler:
    def __init__(self, U, Upp, nx=96, ny=512, Ly=16.0):
        self.nx, self.ny, self.Ly = nx, ny, Ly
        self.x = 2 * np.pi * np.arange(nx) / nx
        self.y = -Ly + 2 * Ly * np.arange(ny) / ny
        self.kx = np.fft.fftfreq(nx, 1.0 / nx)
        self.ky = np.fft.fftfreq(ny, 2 * Ly / ny) * 2 * np.pi
        KX, KY = np.meshgrid(self.kx, self.ky, indexing="ij")
        self.KX, self.KY = KX, KY
        self.k2 = KX ** 2 + KY ** 2
        self.inv_k2 = np.where(self.k2 > 0, 1.0 / np.where(self.k2 > 0, self.k2, 1), 0.0)
        cut_x = np.abs(self.kx) <= nx / 3
        cut_y = np.abs(self.ky) <= self.ky.max() * 2 / 3
        self.mask = cut_x[:, None] & cut_y[None, :]
        self.U = U(self.y)[None, :]
        self.Upp = Upp(self.y)[None, :]

    def velocity_hat(self, wh):
        psi = wh * self.inv_k2            # -lap psi = w
        return 1j * self.KY * psi, -1j * self.KX * psi

    def rhs(self, wh):
        uh, vh = self.velocity_hat(wh)
        u, v = np.fft.ifft2(uh).real, np.fft.ifft2(vh).real
        wx = np.fft.ifft2(1j * self.KX * wh).real
        wy = np.fft.ifft2(1j * self.KY * wh).real
        nl = (self.U + u) * wx + v * (wy - self.Upp)
        return -np.fft.fft2(nl) * self.mask

    def step(self, wh, dt):
        k1 = self.rhs(wh)
        k2 = self.rhs(wh + 0.5 * dt * k1)
        k3 = self.rhs(wh + 0.5 * dt * k2)
        k4 = self.rhs(wh + dt * k3)
        return wh + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    def from_streamfunction(self, psi):
        """Vorticity spectrum of a perturbation streamfunction sampled on the grid."""
        return self.k2 * np.fft.fft2(psi) * self.mask

    def run(self, wh, T, dt):
        n = max(1, int(round(T / dt)))
        for _ in range(n):
            wh = self.step(wh, T / n)
        return wh

    def modes_at(self, wh, y, K):
        """Fourier-series coefficients in x, modes -K..K, of (u', v') at heights y.

        Uses exact trigonometric interpolation in y.
        """
        uh, vh = self.velocity_hat(wh)
        E = np.exp(1j * np.outer(self.ky, y + self.Ly)) / self.ny
        out = []
        for fh in (uh, vh):
            c = (fh @ E) / self.nx          # (nx, len(y)) coefficients per kx
            rows = [c[k % self.nx] for k in range(-K, K + 1)]
            out.append(np.array(rows))
        return out
