# Norm ledger: one CSV row per recorded time with every norm and bound value
# Floats are written with repr (shortest round-trip) so rereading is exact
import csv
import io
import os

from modules.energetics import NormRecord, BoundCertificate, DissipationTracker, bound_certificate
from modules.errors import LedgerError
from modules.log import logger, ledgerLogger
from modules.timestepper import Observer
import modules.settings as my_settings

VERSION_LINE = f"# peq-ledger version={my_settings.LEDGER_VERSION}"
COLUMNS = NormRecord.columns() + BoundCertificate.columns() + ("C_M",)


def _render(values):
    buffer = io.StringIO()
    csv.writer(buffer, lineterminator="\n").writerow(values)
    return buffer.getvalue()


def write_ledger_header(path):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(VERSION_LINE + "\n")
        f.write(_render(COLUMNS))


def append_ledger_row(record, certificate, path):
    """Append one row; the header goes in first when the file is new or empty."""
    if not os.path.isfile(path) or os.path.getsize(path) == 0:
        write_ledger_header(path)
    values = record.values() + certificate.values() + (certificate.C_M,)
    line = _render(repr(float(v)) for v in values)
    try:
        # a single write of a complete line keeps rows whole
        with open(path, "a", encoding="utf-8", newline="") as f:
            f.write(line)
            f.flush()
            os.fsync(f.fileno())
    except OSError as e:
        raise LedgerError(f"cannot append to ledger {path}: {e.strerror}") from e
    ledgerLogger.info(f"t={record.t:.6g} |v|^2={record.v_l2sq:.6e} |T|^2={record.T_l2sq:.6e} K1={certificate.K1:.6e}")


def read_ledger(path):
    """Returns (records, certificates) in file order."""
    try:
        with open(path, encoding="utf-8", newline="") as f:
            first = f.readline().rstrip("\n")
            if first != VERSION_LINE:
                raise LedgerError(f"unsupported ledger header {first!r}, expected {VERSION_LINE!r}")
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None or tuple(header) != COLUMNS:
                raise LedgerError(f"ledger columns do not match version {my_settings.LEDGER_VERSION}")
            rows = list(reader)
    except OSError as e:
        raise LedgerError(f"cannot read ledger {path}: {e.strerror}") from e

    n_norms = len(NormRecord.columns())
    n_bounds = len(BoundCertificate.columns())
    records, certificates = [], []
    for number, row in enumerate(rows, start=3):
        if len(row) != len(COLUMNS):
            raise LedgerError(f"ledger line {number} has {len(row)} fields, expected {len(COLUMNS)}")
        try:
            values = [float(v) for v in row]
        except ValueError as e:
            raise LedgerError(f"ledger line {number}: {e}") from e
        record = NormRecord(*values[:n_norms])
        bounds = dict(zip(BoundCertificate.columns(), values[n_norms:n_norms + n_bounds]))
        records.append(record)
        certificates.append(BoundCertificate(t=record.t, C_M=values[-1], **bounds))
    logger.debug(f"System: read {len(records)} ledger rows from {path}")
    return records, certificates


class LedgerWriter:
    """Observer callback: norms and certificate of each state it is handed, appended to the ledger.

    Certificates are evaluated from the first state seen. The dissipation
    integrals come from `tracker`, which must see every step; `observers()`
    returns the pair in the order the stepper has to call them.
    """

    def __init__(self, path, grid, params, forcing_norms, C_M, exp_cap=None, kappa=None):
        self.path = path
        self.grid = grid
        self.params = params
        self.forcing_norms = forcing_norms
        self.C_M = C_M
        self.exp_cap = exp_cap
        self.kappa = kappa
        self.tracker = DissipationTracker(grid, params)
        self.initial = None
        self.records = []
        self.certificates = []
        write_ledger_header(path)

    def observers(self, every=1):
        return [Observer(self.tracker), Observer(self, every=every)]

    def __call__(self, step, state):
        if self.tracker.last is None or self.tracker.last.t != state.t:
            # not wired through observers(): integrals fall back to the ledger cadence
            self.tracker(step, state)
        record = self.tracker.last
        if self.initial is None:
            self.initial = record
        certificate = bound_certificate(record.t - self.initial.t, self.initial, self.forcing_norms, self.params,
                                        self.C_M, self.grid.h, self.exp_cap, self.kappa)
        append_ledger_row(record, certificate, self.path)
        self.records.append(record)
        self.certificates.append(certificate)
