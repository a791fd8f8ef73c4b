# 空文件，标记这是一个 Python 包
