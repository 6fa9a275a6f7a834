"""Collates json-formatted suite reports and saves them as .feather and .csv
files."""
################################################################################
# Acceptance suite reports
################################################################################
import pandas as pd
import json
from glob import glob
from tqdm import tqdm
import os
import sys

rdir = '../results/'

if len(sys.argv) > 1:
    rdir = sys.argv[1]
else:
    print('no rdir provided, using',rdir)
print('reading reports from directory', rdir)

##########
# load reports from json
##########
frames = []
comparison_cols = [
    'check',
    'seed',
    'scale',
    'cases',
    'holds',
    'hypotheses_hold',
]
fails = []
for f in tqdm(sorted(glob(os.path.join(rdir, '*.json')))):
    try:
        r = json.load(open(f,'r'))
        sub_r = {k:v for k,v in r.items() if k in comparison_cols}
        sub_r['violations'] = len(r.get('violations', []))
        sub_r['file'] = os.path.basename(f)
        frames.append(sub_r)
    except Exception as e:
        fails.append([f,e])

print(len(fails),'fails:',fails)
df_results = pd.DataFrame.from_records(frames)
if df_results.empty:
    print('no reports found')
    sys.exit(1)
##########
# cleanup
##########
if 'hypotheses_hold' not in df_results.columns:
    df_results['hypotheses_hold'] = True
# checks without the field ran on a strict system
df_results['hypotheses_hold'] = df_results['hypotheses_hold'].fillna(True)
df_results = df_results.sort_values(['check','seed']).reset_index(drop=True)
print('loaded',len(df_results),'reports')
for col in ['check','seed']:
    print(df_results[col].nunique(), col+'s')

##########
# save results
##########
df_results.to_feather(os.path.join(rdir, 'suite_results.feather'))
df_results.to_csv(os.path.join(rdir, 'suite_results.csv'), index=False)
print('results saved to', os.path.join(rdir, 'suite_results.feather'))

########
print('violations per check:')
print(df_results.groupby('check')['violations'].sum().sort_values())
