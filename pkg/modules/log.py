import logging
import os
import re
from logging.handlers import TimedRotatingFileHandler
import modules.settings as my_settings
# if LOGGING_LEVEL is not set in settings.py, default to INFO
if not my_settings.LOGGING_LEVEL:
    my_settings.LOGGING_LEVEL = "INFO"

LOGGING_LEVEL = getattr(logging, my_settings.LOGGING_LEVEL.upper(), logging.INFO)

class CustomFormatter(logging.Formatter):
    # ANSI colour per level on the console
    LEVEL_COLOURS = {
        logging.DEBUG: '\x1b[38;5;39m',
        logging.INFO: '\x1b[38;5;231m',
        logging.WARNING: '\x1b[38;5;226m',
        logging.ERROR: '\x1b[38;5;196m',
        logging.CRITICAL: '\x1b[31;1m',
    }
    reset = '\x1b[0m'

    def __init__(self, fmt):
        super().__init__()
        self.formatters = {level: logging.Formatter(colour + fmt + self.reset)
                           for level, colour in self.LEVEL_COLOURS.items()}
        self.fallback = logging.Formatter(fmt)

    def format(self, record):
        return self.formatters.get(record.levelno, self.fallback).format(record)

class plainFormatter(logging.Formatter):
    ansi_escape = re.compile(r'\x1b\[[0-9;]*m')

    def format(self, record):
        return self.ansi_escape.sub('', super().format(record))

# Create logger
logger = logging.getLogger("PEQ System Logger")
logger.setLevel(LOGGING_LEVEL)
logger.propagate = False

# one line per ledger row, for tailing long runs
ledgerLogger = logging.getLogger("PEQ Ledger Logger")
ledgerLogger.setLevel(logging.INFO)
ledgerLogger.propagate = False

logFormat = '%(asctime)s | %(levelname)8s | %(message)s'
ledgerLogFormat = '%(asctime)s | %(message)s'

if not logger.handlers:
    stdout_handler = logging.StreamHandler()
    stdout_handler.setLevel(LOGGING_LEVEL)
    stdout_handler.setFormatter(CustomFormatter(logFormat))
    logger.addHandler(stdout_handler)

    if my_settings.syslog_to_file:
        os.makedirs(my_settings.log_dir, exist_ok=True)
        file_handler_sys = TimedRotatingFileHandler(os.path.join(my_settings.log_dir, 'peq.log'), when='midnight', backupCount=my_settings.log_backup_count, encoding='utf-8')
        file_handler_sys.setLevel(LOGGING_LEVEL)
        file_handler_sys.setFormatter(plainFormatter(logFormat))
        logger.addHandler(file_handler_sys)

if not ledgerLogger.handlers:
    if my_settings.log_ledger_to_file:
        os.makedirs(my_settings.log_dir, exist_ok=True)
        file_handler = TimedRotatingFileHandler(os.path.join(my_settings.log_dir, 'ledger.log'), when='midnight', backupCount=my_settings.log_backup_count, encoding='utf-8')
        file_handler.setLevel(logging.INFO)
        file_handler.setFormatter(logging.Formatter(ledgerLogFormat))
        ledgerLogger.addHandler(file_handler)
    else:
        ledgerLogger.addHandler(logging.NullHandler())

# Pretty wall-clock duration
def getPrettyTime(seconds):
    # convert a duration in seconds to ms, s, m or h for simple display
    if seconds < 1:
        return f"{int(round(seconds * 1000))}ms"
    elif seconds < 60:
        return f"{seconds:.1f}s"
    elif seconds < 3600:
        return f"{int(round(seconds / 60))}m"
    else:
        return f"{seconds / 3600:.1f}h"
