'''
Energy logs: one CSV row per EnergyRecord, floats with 17 significant digits so that values read back bit-exactly
'''
import math
import pandas as pd
from pandas.errors import EmptyDataError, ParserError

from src.custom.metrics import EnergyRecord

COLUMNS = ['step', 'time', 'energy', 'modified_energy', 'mass', 'l2_norm', 'h2_seminorm', 'first_step_ratio']
OPTIONAL_COLUMNS = {'modified_energy', 'first_step_ratio'}


class CsvFormatError(ValueError):
    '''
    Raised for a malformed energy CSV; line is the 1-based line number in the file
    '''

    def __init__(self, message, line):
        super().__init__('line {}: {}'.format(line, message))
        self.line = line


def _format_float(value):
    if value is None:
        return ''
    return '{:.17g}'.format(value)


def records_to_frame(records):
    '''
    Records as a DataFrame of strings in the CSV column order
    '''
    rows = []
    for r in records:
        rows.append([str(int(r.step))] + [_format_float(getattr(r, c)) for c in COLUMNS[1:]])
    return pd.DataFrame(rows, columns=COLUMNS)


def write_energy_csv(records, path):
    '''
    Writes records to a CSV file. Absent optional values are written as empty cells.
    :param records: List of EnergyRecord
    :param path: Output file path
    '''
    records_to_frame(records).to_csv(path, index=False)


def _parse_float(text, column, line):
    try:
        return float(text)
    except ValueError:
        raise CsvFormatError('column {} holds {!r}, expected a number'.format(column, text), line)


def read_energy_csv(path):
    '''
    Reads an energy CSV written by write_energy_csv
    :param path: Path to the CSV file
    :return: List of EnergyRecord
    '''
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except EmptyDataError:
        raise CsvFormatError('file is empty, expected the header {}'.format(','.join(COLUMNS)), 1)
    except ParserError as e:
        raise CsvFormatError('could not parse CSV ({})'.format(e), _line_of(e))
    if list(df.columns) != COLUMNS:
        raise CsvFormatError('header {} does not match {}'.format(','.join(df.columns), ','.join(COLUMNS)), 1)

    records = []
    for i, row in enumerate(df.itertuples(index=False)):
        line = i + 2
        values = {}
        for column, text in zip(COLUMNS, row):
            if not isinstance(text, str):
                # short rows are padded with NaN by the parser
                raise CsvFormatError('row has no value for column {}'.format(column), line)
            text = text.strip()
            if text == '':
                if column not in OPTIONAL_COLUMNS:
                    raise CsvFormatError('column {} is empty'.format(column), line)
                values[column] = None
            elif column == 'step':
                try:
                    values[column] = int(text)
                except ValueError:
                    raise CsvFormatError('column step holds {!r}, expected an integer'.format(text), line)
            else:
                values[column] = _parse_float(text, column, line)
        if records and values['step'] <= records[-1].step:
            raise CsvFormatError('step {} does not increase'.format(values['step']), line)
        records.append(EnergyRecord(**values))
    return records


def _line_of(error):
    '''
    Best-effort line number from a pandas parser message ("... in line 7, saw 9")
    '''
    words = str(error).replace(',', ' ').split()
    for a, b in zip(words, words[1:]):
        if a == 'line' and b.isdigit():
            return int(b)
    return math.nan
