"""
Benchmark de controladores MPC para navegação social de robôs.

Reúne o modelo do robô, a percepção com incerteza, os termos de custo
e restrições, o solver de horizonte deslizante, o simulador de multidão
e o harness de linha de comando que agrega as métricas.
"""

__version__ = "0.1.0"
