from setuptools import setup
setup(name='schreierlab',
      version='0.0',
      description='Exact laboratory for Schreier-type norming sets',
      packages = ['schreierlab','schreierlab.test'],
      package_dir = {'schreierlab':'schreierlab'},
      package_data = {'schreierlab.test':['*.yaml']},
      install_requires = ['numpy','pandas','pyyaml','joblib','sympy','tqdm',
                          'pyarrow'],
)
