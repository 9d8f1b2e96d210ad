# Settings for the primitive-equations solver and its certificate harness
# Process-level settings only; per-run physics lives in the run config (modules/runconfig.py)
import configparser
import os

# messages
SOLVER_BANNER = "PEQ: pressure-eliminated primitive equations solver"
CERT_PASS = "pass"
CERT_FAIL = "fail"

# snapshot and ledger format constants
SNAPSHOT_MAGIC = b"PEQ1"
SNAPSHOT_VERSION = 1
LEDGER_VERSION = 2

# Read the config file, if it does not exist use the built-in defaults
config = configparser.ConfigParser()
config_file = os.environ.get("PEQ_CONFIG", "config.ini")

try:
    config.read(config_file, encoding='utf-8')
except Exception as e:
    print(f"System: Error reading config file: {e}")
    print(f"System: Check the config.ini against config.template file for missing sections or values.")
    print(f"System: Exiting...")
    exit(1)

if 'general' not in config:
    config['general'] = {'sysloglevel': 'INFO', 'SyslogToFile': 'False', 'LogLedgerToFile': 'False', 'LogBackupCount': '32'}

if 'solver' not in config:
    config['solver'] = {'poisson_tol': '1e-10', 'poisson_max_iter': '20000', 'poincare_tol': '1e-8', 'poincare_max_iter': '500',
                        'exp_cap': '700', 'quant_slack': '1.05', 'twin_slack': '1.25'}

# variables from the config.ini file
try:
    # general
    LOGGING_LEVEL = config['general'].get('sysloglevel', 'INFO')
    syslog_to_file = config['general'].getboolean('SyslogToFile', False)
    log_ledger_to_file = config['general'].getboolean('LogLedgerToFile', False)
    log_backup_count = config['general'].getint('LogBackupCount', 32) # default 32 days
    log_dir = config['general'].get('logDir', 'logs')

    # solver
    poisson_tol = config['solver'].getfloat('poisson_tol', 1e-10) # relative residual of the surface-pressure solve
    poisson_max_iter = config['solver'].getint('poisson_max_iter', 20000)
    poincare_tol = config['solver'].getfloat('poincare_tol', 1e-8)
    poincare_max_iter = config['solver'].getint('poincare_max_iter', 500)
    exp_cap = config['solver'].getfloat('exp_cap', 700.0) # exponent beyond which a bound is reported as +inf
    quant_slack = config['solver'].getfloat('quant_slack', 1.05)
    twin_slack = config['solver'].getfloat('twin_slack', 1.25)
except KeyError as e:
    print(f"System: Error reading config file: {e}")
    print(f"System: Check the config.ini against config.template file for missing sections or values.")
    print(f"System: Exiting...")
    exit(1)
