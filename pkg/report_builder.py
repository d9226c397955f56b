import json
import sys
from dataclasses import dataclass, field, is_dataclass, asdict
from datetime import datetime, timezone

import numpy as np
import pandas as pd

CSV_FLOAT_FORMAT = '%.17g'
OUTPUT_FORMATS = ('json', 'csv', 'table')


### Run configuration ###

@dataclass
class RunConfig:
    '''
    Fully resolved configuration of one CLI run; echoed in the output metadata.
    '''
    subcommand: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    output_format: str = 'json'
    output_path: str = None
    threads: int = 1
    reproducible: bool = False
    verbose: bool = False

    def metadata(self):
        meta = {
            'subcommand': self.subcommand,
            'params': to_jsonable(self.params),
            'seed': self.seed,
            'threads': self.threads,
            'output_format': self.output_format,
        }
        if not self.reproducible:
            meta['timestamp'] = datetime.now(timezone.utc).isoformat(timespec='seconds')
        return meta


### Conversion to plain data ###

def _float(x):
    x = float(x)
    if np.isnan(x):
        return 'nan'
    if np.isinf(x):
        return 'inf' if x > 0 else '-inf'
    return x


def to_jsonable(obj):
    '''
    Convert results (dataclasses with to_dict, numpy values, DataFrames) into JSON-ready data.
    '''
    if hasattr(obj, 'to_dict') and not isinstance(obj, (pd.DataFrame, pd.Series)):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, pd.DataFrame):
        return [to_jsonable(row) for row in obj.to_dict(orient='records')]
    if isinstance(obj, pd.Series):
        return to_jsonable(obj.tolist())
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    return obj


def to_table(result):
    '''
    DataFrame view of a result: DataFrames pass through, a list of dicts becomes rows,
    a dict becomes one row with nested values flattened (pd.json_normalize).
    '''
    if isinstance(result, pd.DataFrame):
        return result
    data = to_jsonable(result)
    if isinstance(data, list) and all(isinstance(row, dict) for row in data):
        return pd.json_normalize(data)
    if isinstance(data, dict):
        return pd.json_normalize(data)
    return pd.DataFrame({'value': data if isinstance(data, list) else [data]})


### Serialisation ###

def render_json(result, config):
    payload = {'metadata': config.metadata(), 'result': to_jsonable(result)}
    return json.dumps(payload, indent=2, sort_keys=True) + '\n'


def metadata_lines(config):
    '''
    "# key: value" comment lines echoing the run configuration; non-string values are JSON.
    '''
    return [f"# {key}: {value if isinstance(value, str) else json.dumps(value, sort_keys=True)}"
            for key, value in config.metadata().items()]


def render_csv(result, config):
    body = to_table(result).to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')
    return '\n'.join(metadata_lines(config)) + '\n' + body


def render_table(result, config):
    lines = metadata_lines(config)
    with pd.option_context('display.max_columns', None, 'display.width', 200, 'display.precision', 12):
        lines.append(to_table(result).to_string(index=False))
    return '\n'.join(lines) + '\n'


def render(result, config):
    if config.output_format == 'json':
        return render_json(result, config)
    if config.output_format == 'csv':
        return render_csv(result, config)
    if config.output_format == 'table':
        return render_table(result, config)
    raise ValueError(f"Unknown output format '{config.output_format}'. Expected one of {OUTPUT_FORMATS}.")


def write_output(result, config):
    '''
    Render the result in the configured format and write it to the output path, or stdout.
    '''
    text = render(result, config)
    if config.output_path:
        with open(config.output_path, 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return text


def error_payload(error):
    '''
    Machine-readable form of an error: {"error": kind, "message": ..., "witness": ...}.
    '''
    if hasattr(error, 'to_dict'):
        data = error.to_dict()
    else:
        data = {'error': type(error).__name__, 'message': str(error)}
    data.setdefault('witness', None)
    return to_jsonable(data)
