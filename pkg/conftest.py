import os
import sys

# 仓库根目录加入 sys.path，测试中使用与 app.py 相同的绝对导入
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
